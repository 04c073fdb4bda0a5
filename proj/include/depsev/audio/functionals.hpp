#pragma once

#include <array>
#include <cmath>
#include <string_view>

#include <Eigen/Dense>

#include "depsev/error.hpp"

namespace depsev::audio {

inline constexpr int kNumFunctionals = 24;

// Output order of apply_functionals. Positions are in frames; regression uses
// t = 0..n-1; approximation errors are mean squared residuals.
inline constexpr std::array<std::string_view, kNumFunctionals> kFunctionalNames = {
    "range",     "maxPos",      "minPos",      "linregc1",   "linregc2", "linregerrQ",
    "qregc1",    "qregc2",      "qregc3",      "qregerrQ",   "zcr",      "numPeaks",
    "meanPeakDist", "peakMean", "nnzGeomean",  "numNz",      "centroid", "variance",
    "stddev",    "skewness",    "kurtosis",    "amean",      "max",      "min"};

using FunctionalVector = Eigen::Matrix<double, kNumFunctionals, 1>;

namespace functional_index {
enum : int {
  kRange, kMaxPos, kMinPos, kLinSlope, kLinOffset, kLinError, kQuadA, kQuadB, kQuadC, kQuadError,
  kZeroCrossingRate, kNumPeaks, kMeanPeakDistance, kPeakMean, kNonZeroGeoMean, kNumNonZero,
  kCentroid, kVariance, kStdDev, kSkewness, kKurtosis, kMean, kMax, kMin
};
}  // namespace functional_index

// Projects a per-frame track onto 24 scalars. Conventions: peaks are strict
// interior local maxima above the track mean; with fewer than two peaks the
// mean peak distance is 0 (and the peak mean is 0 without peaks); a constant
// track has variance, skewness and kurtosis 0; kurtosis is non-excess; the
// centroid is 0 when the values sum to 0. Throws ArgumentError below 3 frames.
template <typename Derived>
FunctionalVector apply_functionals(const Eigen::MatrixBase<Derived>& track) {
  using namespace functional_index;
  const Eigen::VectorXd x = track.template cast<double>();
  const Eigen::Index n = x.size();
  if (n < 3) throw ArgumentError("functionals need a track of at least 3 frames");
  const double nd = static_cast<double>(n);
  FunctionalVector out = FunctionalVector::Zero();

  Eigen::Index arg_max = 0;
  Eigen::Index arg_min = 0;
  const double max = x.maxCoeff(&arg_max);
  const double min = x.minCoeff(&arg_min);
  const double mean = x.mean();
  out[kRange] = max - min;
  out[kMaxPos] = static_cast<double>(arg_max);
  out[kMinPos] = static_cast<double>(arg_min);
  out[kMean] = mean;
  out[kMax] = max;
  out[kMin] = min;

  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(n, 0.0, nd - 1.0);
  {
    const double t_mean = (nd - 1.0) / 2.0;
    const Eigen::VectorXd tc = t.array() - t_mean;
    const double slope = tc.dot(x.array().matrix() - Eigen::VectorXd::Constant(n, mean)) /
                         tc.squaredNorm();
    const double offset = mean - slope * t_mean;
    out[kLinSlope] = slope;
    out[kLinOffset] = offset;
    out[kLinError] = ((x.array() - (slope * t.array() + offset)).square()).mean();
  }
  {
    // Scaled abscissa keeps the Vandermonde system well conditioned.
    const double scale = nd - 1.0;
    Eigen::MatrixXd design(n, 3);
    design.col(0) = (t.array() / scale).square().matrix();
    design.col(1) = t / scale;
    design.col(2).setOnes();
    const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(x);
    out[kQuadA] = coef[0] / (scale * scale);
    out[kQuadB] = coef[1] / scale;
    out[kQuadC] = coef[2];
    out[kQuadError] = (x - design * coef).squaredNorm() / nd;
  }

  int crossings = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    if ((x[i - 1] < 0.0 && x[i] >= 0.0) || (x[i - 1] >= 0.0 && x[i] < 0.0)) ++crossings;
  }
  out[kZeroCrossingRate] = crossings / nd;

  int peaks = 0;
  double peak_sum = 0.0;
  Eigen::Index first_peak = -1;
  Eigen::Index last_peak = -1;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    if (x[i] > x[i - 1] && x[i] > x[i + 1] && x[i] > mean) {
      ++peaks;
      peak_sum += x[i];
      if (first_peak < 0) first_peak = i;
      last_peak = i;
    }
  }
  out[kNumPeaks] = peaks;
  out[kPeakMean] = peaks > 0 ? peak_sum / peaks : 0.0;
  out[kMeanPeakDistance] =
      peaks >= 2 ? static_cast<double>(last_peak - first_peak) / (peaks - 1) : 0.0;

  int nonzero = 0;
  double log_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x[i] != 0.0) {
      ++nonzero;
      log_sum += std::log(std::abs(x[i]));
    }
  }
  out[kNumNonZero] = nonzero;
  out[kNonZeroGeoMean] = nonzero > 0 ? std::exp(log_sum / nonzero) : 0.0;

  const double sum = x.sum();
  out[kCentroid] = sum != 0.0 ? t.dot(x) / sum : 0.0;

  if (max != min) {
    const Eigen::ArrayXd dev = x.array() - mean;
    const double m2 = dev.square().mean();
    const double m3 = dev.cube().mean();
    const double m4 = dev.square().square().mean();
    const double sd = std::sqrt(m2);
    out[kVariance] = m2;
    out[kStdDev] = sd;
    out[kSkewness] = m3 / (m2 * sd);
    out[kKurtosis] = m4 / (m2 * m2);
  }
  return out;
}

}  // namespace depsev::audio
