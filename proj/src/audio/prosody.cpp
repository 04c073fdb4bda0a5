#include "depsev/audio/prosody.hpp"

#include <algorithm>
#include <cmath>

namespace depsev::audio {
namespace {

constexpr double kEnergyFloor = 1e-20;

}  // namespace

double normalized_autocorrelation(std::span<const double> frame, int lag) {
  const auto n = static_cast<int>(frame.size());
  if (lag <= 0) return 1.0;
  if (lag >= n) return 0.0;
  double cross = 0.0;
  double head = 0.0;
  double tail = 0.0;
  for (int i = 0; i + lag < n; ++i) {
    cross += frame[i] * frame[i + lag];
    head += frame[i] * frame[i];
    tail += frame[i + lag] * frame[i + lag];
  }
  const double denom = std::sqrt(head * tail);
  return denom > 0.0 ? cross / denom : 0.0;
}

PitchEstimate estimate_pitch(std::span<const double> frame, int sample_rate,
                             const PitchConfig& config) {
  double energy = 0.0;
  for (double s : frame) energy += s * s;
  if (energy <= kEnergyFloor) return {};

  const int n = static_cast<int>(frame.size());
  const int min_lag = std::max(2, static_cast<int>(std::floor(sample_rate / config.f0_max)));
  const int max_lag = std::min(n - 2, static_cast<int>(std::ceil(sample_rate / config.f0_min)));
  if (max_lag <= min_lag) return {};

  std::vector<double> acf(static_cast<std::size_t>(max_lag + 2), 0.0);
  for (int lag = min_lag - 1; lag <= max_lag + 1; ++lag) {
    acf[static_cast<std::size_t>(lag)] = normalized_autocorrelation(frame, lag);
  }

  std::vector<int> peaks;
  double best = -1.0;
  for (int lag = min_lag; lag <= max_lag; ++lag) {
    const double v = acf[static_cast<std::size_t>(lag)];
    if (v > acf[static_cast<std::size_t>(lag - 1)] && v >= acf[static_cast<std::size_t>(lag + 1)]) {
      peaks.push_back(lag);
      best = std::max(best, v);
    }
  }
  if (peaks.empty() || best <= 0.0) {
    return {0.0, std::clamp(*std::max_element(acf.begin() + min_lag, acf.begin() + max_lag + 1),
                            0.0, 1.0)};
  }

  int chosen = peaks.front();
  for (int lag : peaks) {
    if (acf[static_cast<std::size_t>(lag)] >= config.octave_tolerance * best) {
      chosen = lag;
      break;
    }
  }
  const double height = acf[static_cast<std::size_t>(chosen)];
  PitchEstimate estimate;
  estimate.voicing = std::clamp(height, 0.0, 1.0);
  if (estimate.voicing < config.voicing_threshold) return estimate;

  // Parabolic refinement of the peak lag.
  const double left = acf[static_cast<std::size_t>(chosen - 1)];
  const double right = acf[static_cast<std::size_t>(chosen + 1)];
  const double curvature = left - 2.0 * height + right;
  double offset = 0.0;
  if (curvature < 0.0) offset = std::clamp(0.5 * (left - right) / curvature, -0.5, 0.5);
  estimate.f0 = sample_rate / (chosen + offset);
  return estimate;
}

std::vector<LldTrack> prosodic_llds(const FrameSet& frames, const PitchConfig& config) {
  const Eigen::Index n = frames.size();
  LldTrack f0{"f0", LldGroup::Prosody, 0, Eigen::VectorXd::Zero(n)};
  LldTrack envelope{"f0_env", LldGroup::Prosody, 0, Eigen::VectorXd::Zero(n)};
  LldTrack loudness{"loudness", LldGroup::Prosody, 0, Eigen::VectorXd::Zero(n)};
  LldTrack voicing{"voicing_prob", LldGroup::Prosody, 0, Eigen::VectorXd::Zero(n)};

  std::vector<double> buffer(static_cast<std::size_t>(frames.frame_length));
  double held = 0.0;
  for (Eigen::Index f = 0; f < n; ++f) {
    Eigen::Map<Eigen::RowVectorXd>(buffer.data(), frames.frame_length) = frames.raw.row(f);
    const auto pitch = estimate_pitch(buffer, frames.sample_rate, config);
    f0.values[f] = pitch.f0;
    voicing.values[f] = pitch.voicing;
    if (pitch.f0 > 0.0) held = pitch.f0;
    envelope.values[f] = held;
    loudness.values[f] = std::log(std::max(frames.windowed.row(f).squaredNorm(), kEnergyFloor));
  }
  return {f0, envelope, loudness, voicing};
}

}  // namespace depsev::audio
