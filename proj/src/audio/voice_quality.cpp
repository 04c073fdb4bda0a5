#include "depsev/audio/voice_quality.hpp"

#include <algorithm>
#include <cmath>

#include "depsev/audio/prosody.hpp"

namespace depsev::audio {
namespace {

// Relative search range around the expected next pulse.
constexpr double kSearchRange = 0.2;
// Bounds on the autocorrelation ratio entering logHNR (+-60 dB).
constexpr double kHnrRatioFloor = 1e-6;

PitchPulse refine(std::span<const double> x, int i) {
  const auto n = static_cast<int>(x.size());
  if (i <= 0 || i >= n - 1) return {static_cast<double>(i), x[static_cast<std::size_t>(i)]};
  const double l = x[static_cast<std::size_t>(i - 1)];
  const double c = x[static_cast<std::size_t>(i)];
  const double r = x[static_cast<std::size_t>(i + 1)];
  const double curvature = l - 2.0 * c + r;
  if (curvature >= 0.0) return {static_cast<double>(i), c};
  const double offset = std::clamp(0.5 * (l - r) / curvature, -0.5, 0.5);
  return {i + offset, c - 0.25 * (l - r) * offset};
}

// Index of the largest sample in [lo, hi], or -1 when the maximum sits on the
// range edge of the frame (not a full pulse).
int pulse_in(std::span<const double> x, int lo, int hi) {
  const auto n = static_cast<int>(x.size());
  lo = std::max(lo, 0);
  hi = std::min(hi, n - 1);
  if (lo > hi) return -1;
  int best = lo;
  for (int i = lo + 1; i <= hi; ++i) {
    if (x[static_cast<std::size_t>(i)] > x[static_cast<std::size_t>(best)]) best = i;
  }
  if (best == 0 || best == n - 1) return -1;
  return best;
}

}  // namespace

std::vector<PitchPulse> find_pitch_pulses(std::span<const double> frame, double period) {
  std::vector<PitchPulse> pulses;
  const auto n = static_cast<int>(frame.size());
  if (n < 3 || !(period > 0.0)) return pulses;
  const int anchor = pulse_in(frame, 0, n - 1);
  if (anchor < 0 || frame[static_cast<std::size_t>(anchor)] <= 0.0) return pulses;

  pulses.push_back(refine(frame, anchor));
  for (int direction : {-1, 1}) {
    int current = anchor;
    while (true) {
      const double expected = current + direction * period;
      const int lo = static_cast<int>(std::floor(expected - kSearchRange * period));
      const int hi = static_cast<int>(std::ceil(expected + kSearchRange * period));
      if (lo < 0 || hi > n - 1) break;
      const int next = pulse_in(frame, lo, hi);
      if (next < 0 || frame[static_cast<std::size_t>(next)] <= 0.0) break;
      pulses.push_back(refine(frame, next));
      current = next;
    }
  }
  std::sort(pulses.begin(), pulses.end(),
            [](const PitchPulse& a, const PitchPulse& b) { return a.position < b.position; });
  return pulses;
}

Perturbation perturbation_from_pulses(std::span<const PitchPulse> pulses) {
  Perturbation out;
  if (pulses.size() < 3) return out;
  std::vector<double> periods;
  for (std::size_t i = 1; i < pulses.size(); ++i) {
    periods.push_back(pulses[i].position - pulses[i - 1].position);
  }
  double period_mean = 0.0;
  for (double p : periods) period_mean += p;
  period_mean /= static_cast<double>(periods.size());

  double diff = 0.0;
  for (std::size_t i = 1; i < periods.size(); ++i) diff += std::abs(periods[i] - periods[i - 1]);
  out.jitter_local = diff / static_cast<double>(periods.size() - 1) / period_mean;

  if (periods.size() >= 3) {
    double ddp = 0.0;
    for (std::size_t i = 1; i + 1 < periods.size(); ++i) {
      ddp += std::abs((periods[i + 1] - periods[i]) - (periods[i] - periods[i - 1]));
    }
    out.jitter_ddp = ddp / static_cast<double>(periods.size() - 2) / period_mean;
  }

  double amp_mean = 0.0;
  for (const auto& p : pulses) amp_mean += p.amplitude;
  amp_mean /= static_cast<double>(pulses.size());
  double amp_diff = 0.0;
  for (std::size_t i = 1; i < pulses.size(); ++i) {
    amp_diff += std::abs(pulses[i].amplitude - pulses[i - 1].amplitude);
  }
  if (amp_mean > 0.0) {
    out.shimmer_local = amp_diff / static_cast<double>(pulses.size() - 1) / amp_mean;
  }
  return out;
}

std::vector<LldTrack> voice_quality_llds(const FrameSet& frames,
                                         const Eigen::Ref<const Eigen::VectorXd>& f0) {
  const Eigen::Index n = frames.size();
  LldTrack jitter{"jitter_local", LldGroup::VoiceQuality, 0, Eigen::VectorXd::Zero(n)};
  LldTrack ddp{"jitter_ddp", LldGroup::VoiceQuality, 0, Eigen::VectorXd::Zero(n)};
  LldTrack shimmer{"shimmer_local", LldGroup::VoiceQuality, 0, Eigen::VectorXd::Zero(n)};
  LldTrack hnr{"log_hnr", LldGroup::VoiceQuality, 0, Eigen::VectorXd::Zero(n)};

  std::vector<double> buffer(static_cast<std::size_t>(frames.frame_length));
  for (Eigen::Index f = 0; f < n; ++f) {
    if (!(f0[f] > 0.0)) continue;
    Eigen::Map<Eigen::RowVectorXd>(buffer.data(), frames.frame_length) = frames.raw.row(f);
    const double period = frames.sample_rate / f0[f];
    const auto pulses = find_pitch_pulses(buffer, period);
    const auto perturbation = perturbation_from_pulses(pulses);
    jitter.values[f] = perturbation.jitter_local;
    ddp.values[f] = perturbation.jitter_ddp;
    shimmer.values[f] = perturbation.shimmer_local;

    const double ratio =
        std::clamp(normalized_autocorrelation(buffer, static_cast<int>(std::lround(period))),
                   kHnrRatioFloor, 1.0 - kHnrRatioFloor);
    hnr.values[f] = 10.0 * std::log10(ratio / (1.0 - ratio));
  }
  return {jitter, ddp, shimmer, hnr};
}

}  // namespace depsev::audio
