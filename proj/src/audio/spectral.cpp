#include "depsev/audio/spectral.hpp"

#include <array>
#include <complex>

#include <unsupported/Eigen/FFT>

namespace depsev::audio {
namespace {

constexpr std::array<std::array<double, 2>, 4> kBands = {{
    {0.0, 250.0}, {0.0, 650.0}, {250.0, 650.0}, {1000.0, 4000.0}}};
constexpr std::array<double, 4> kRolloffs = {0.25, 0.50, 0.70, 0.90};

}  // namespace

int spectrum_size(int frame_length) {
  int n = 1;
  while (n < frame_length) n <<= 1;
  return n;
}

Eigen::VectorXd power_spectrum(const Eigen::Ref<const Eigen::VectorXd>& frame, int fft_size) {
  std::vector<double> padded(static_cast<std::size_t>(fft_size), 0.0);
  std::copy(frame.data(), frame.data() + frame.size(), padded.begin());
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> bins;
  fft.fwd(bins, padded);
  Eigen::VectorXd power(fft_size / 2 + 1);
  for (int k = 0; k < power.size(); ++k) power[k] = std::norm(bins[static_cast<std::size_t>(k)]);
  return power;
}

std::vector<LldTrack> spectral_llds(const FrameSet& frames) {
  static const std::array<const char*, 12> kNames = {
      "band_0_250",  "band_0_650",  "band_250_650", "band_1000_4000",
      "rolloff_25",  "rolloff_50",  "rolloff_70",   "rolloff_90",
      "centroid",    "flux",        "max_pos",      "min_pos"};
  const Eigen::Index n = frames.size();
  std::vector<LldTrack> tracks;
  for (const char* name : kNames) {
    tracks.push_back({name, LldGroup::Spectral, 0, Eigen::VectorXd::Zero(n)});
  }

  const int fft_size = spectrum_size(frames.frame_length);
  const Eigen::Index bins = fft_size / 2 + 1;
  const double bin_hz = static_cast<double>(frames.sample_rate) / fft_size;
  const Eigen::VectorXd freq = Eigen::VectorXd::LinSpaced(bins, 0.0, (bins - 1) * bin_hz);

  Eigen::VectorXd previous_shape = Eigen::VectorXd::Zero(bins);
  for (Eigen::Index f = 0; f < n; ++f) {
    const Eigen::VectorXd power = power_spectrum(frames.windowed.row(f).transpose(), fft_size);
    const double total = power.sum();

    for (std::size_t b = 0; b < kBands.size(); ++b) {
      double energy = 0.0;
      for (Eigen::Index k = 0; k < bins; ++k) {
        if (freq[k] >= kBands[b][0] && freq[k] < kBands[b][1]) energy += power[k];
      }
      tracks[b].values[f] = energy;
    }

    if (total > 0.0) {
      for (std::size_t r = 0; r < kRolloffs.size(); ++r) {
        const double target = kRolloffs[r] * total;
        double cumulative = 0.0;
        for (Eigen::Index k = 0; k < bins; ++k) {
          cumulative += power[k];
          if (cumulative >= target) {
            tracks[4 + r].values[f] = freq[k];
            break;
          }
        }
      }
      tracks[8].values[f] = freq.dot(power) / total;
    }

    const Eigen::VectorXd magnitude = power.cwiseSqrt();
    const double mag_sum = magnitude.sum();
    const Eigen::VectorXd shape =
        mag_sum > 0.0 ? Eigen::VectorXd(magnitude / mag_sum) : Eigen::VectorXd::Zero(bins);
    tracks[9].values[f] = f == 0 ? 0.0 : (shape - previous_shape).norm();
    previous_shape = shape;

    Eigen::Index arg_max = 0;
    Eigen::Index arg_min = 0;
    power.maxCoeff(&arg_max);
    power.minCoeff(&arg_min);
    tracks[10].values[f] = freq[arg_max];
    tracks[11].values[f] = freq[arg_min];
  }
  return tracks;
}

}  // namespace depsev::audio
