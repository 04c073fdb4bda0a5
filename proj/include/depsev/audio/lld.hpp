#pragma once

#include <string>

#include <Eigen/Dense>

namespace depsev::audio {

enum class LldGroup { Spectral, Prosody, VoiceQuality };

// One low-level descriptor: a value per frame.
struct LldTrack {
  std::string name;
  LldGroup group = LldGroup::Spectral;
  int derivative_order = 0;
  Eigen::VectorXd values;
};

}  // namespace depsev::audio
