#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "depsev/audio/frames.hpp"
#include "depsev/audio/lld.hpp"

namespace depsev::audio {

struct PitchPulse {
  double position = 0.0;  // samples, sub-sample refined
  double amplitude = 0.0;
};

// Positive pitch pulses spaced roughly one period apart, in time order.
std::vector<PitchPulse> find_pitch_pulses(std::span<const double> frame, double period_samples);

struct Perturbation {
  double jitter_local = 0.0;
  double jitter_ddp = 0.0;
  double shimmer_local = 0.0;
};

// Cycle-to-cycle measures from pulse positions and amplitudes. Fewer than two
// periods give zeros; jitter-DDP needs three.
Perturbation perturbation_from_pulses(std::span<const PitchPulse> pulses);

// jitter-local, jitter-DDP, shimmer-local, logHNR; all 0 where f0 == 0.
std::vector<LldTrack> voice_quality_llds(const FrameSet& frames,
                                         const Eigen::Ref<const Eigen::VectorXd>& f0);

}  // namespace depsev::audio
