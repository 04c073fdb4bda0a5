#pragma once

#include <cstdint>
#include <filesystem>

namespace depsev::pipeline {

// Shape of a generated corpus. Labels are drawn per class (depressed scores
// uniform in [10, 24], others in [0, 9]); every planted effect is a monotone
// function of severity s = score / 24 plus seeded noise:
//   response latency   (0.4 + response_effect * s) * lognormal(0, 0.35) s
//   PDI depression     answered "yes" with probability 0.1 + 0.8 * s
//   PDI ptsd           answered "yes" with probability 0.05 + 0.5 * s
//   laughter, sighs, disfluencies, negative vocabulary, pitch and mouth
//   movement shift with s at fixed rates.
struct SynthSpec {
  int train_sessions = 107;
  int dev_sessions = 35;
  int train_depressed = 30;
  int dev_depressed = 13;
  int first_id = 300;
  int sample_rate = 8000;
  int exchanges = 12;
  double response_effect = 1.8;
  double landmark_seconds = 240.0;
  double landmark_fps = 2.0;
  double tracking_failure_rate = 0.003;
};

// Throws ArgumentError for an inconsistent spec.
void validate(const SynthSpec& spec);

// Writes the corpus layout described in corpus.hpp under `root`.
void gen_synthetic(const SynthSpec& spec, std::uint64_t seed, const std::filesystem::path& root);

}  // namespace depsev::pipeline
