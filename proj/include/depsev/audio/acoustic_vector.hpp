#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "depsev/audio/frames.hpp"
#include "depsev/audio/lld.hpp"
#include "depsev/audio/prosody.hpp"
#include "depsev/types.hpp"

namespace depsev::audio {

enum class AcousticGroup { S, P, VQ, M };

std::string to_string(AcousticGroup group);
AcousticGroup parse_acoustic_group(const std::string& text);

// Feature counts per group: 864 / 288 / 288 / 1440.
std::size_t group_dimension(AcousticGroup group);

struct AcousticVector {
  std::string session_id;
  AcousticGroup group = AcousticGroup::S;
  std::vector<std::string> names;
  Eigen::VectorXd values;
};

struct AcousticConfig {
  FrameConfig framing;
  PitchConfig pitch;
};

// Base tracks of a group (12 spectral, 4 prosodic, 4 voice-quality).
std::vector<LldTrack> base_llds(const FrameSet& frames, AcousticGroup group,
                                const PitchConfig& pitch = {});

// Each base track, then its delta, then its delta-delta, each projected onto
// the 24 functionals. Names are `<group>_<lld>[_de|_dede]_<functional>`.
AcousticVector project_tracks(const std::string& session_id, AcousticGroup group,
                              const std::vector<LldTrack>& base);

// Throws EmptyInputError when the session yields fewer than 5 frames.
AcousticVector session_acoustic_vector(const Session& session, AcousticGroup group,
                                       const AcousticConfig& config = {});

struct AcousticGroups {
  AcousticVector s;
  AcousticVector p;
  AcousticVector vq;
};

// All three groups sharing one framing pass.
AcousticGroups session_acoustic_groups(const Session& session, const AcousticConfig& config = {});

// Concatenation P, S, VQ. Throws ArgumentError on mixed sessions or wrong groups.
AcousticVector merge_groups(const AcousticVector& p, const AcousticVector& s,
                            const AcousticVector& vq);

}  // namespace depsev::audio
