#pragma once

#include <span>
#include <vector>

#include "depsev/audio/frames.hpp"
#include "depsev/audio/lld.hpp"

namespace depsev::audio {

struct PitchConfig {
  double f0_min = 55.0;
  double f0_max = 400.0;
  // Peak height of the normalized autocorrelation above which a frame is voiced.
  double voicing_threshold = 0.55;
  // Earliest lag peak within this fraction of the best peak wins (octave guard).
  double octave_tolerance = 0.9;
};

struct PitchEstimate {
  double f0 = 0.0;       // Hz, 0 when unvoiced
  double voicing = 0.0;  // [0, 1]
};

// Normalized autocorrelation at integer lag: overlap-energy normalized.
double normalized_autocorrelation(std::span<const double> frame, int lag);

PitchEstimate estimate_pitch(std::span<const double> frame, int sample_rate,
                             const PitchConfig& config = {});

// f0, f0 envelope, loudness (natural log of windowed frame energy), voicing probability.
std::vector<LldTrack> prosodic_llds(const FrameSet& frames, const PitchConfig& config = {});

}  // namespace depsev::audio
