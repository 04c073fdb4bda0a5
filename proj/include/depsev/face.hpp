#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "depsev/error.hpp"
#include "depsev/pca.hpp"
#include "depsev/types.hpp"

namespace depsev::face {

// 68*3 coordinates + C(68,2) pairwise distances.
inline constexpr Eigen::Index kGeometricDim = 3 * kNumLandmarks + kNumLandmarks * (kNumLandmarks - 1) / 2;
static_assert(kGeometricDim == 2482);

// Removes the centroid and rescales so the mean distance of the points to the
// origin is 1. Throws NumericError when all points coincide.
template <typename Derived>
Eigen::Matrix<double, Derived::RowsAtCompileTime, 3> normalize_landmarks(
    const Eigen::MatrixBase<Derived>& points) {
  static_assert(Derived::ColsAtCompileTime == 3 || Derived::ColsAtCompileTime == Eigen::Dynamic);
  if (points.cols() != 3 || points.rows() < 1) {
    throw ArgumentError("normalize_landmarks expects an N x 3 point matrix");
  }
  Eigen::Matrix<double, Derived::RowsAtCompileTime, 3> centered =
      points.template cast<double>().rowwise() - points.template cast<double>().colwise().mean();
  const double mean_norm = centered.rowwise().norm().mean();
  if (!(mean_norm > 0.0) || !std::isfinite(mean_norm)) {
    throw NumericError("degenerate landmark frame: all points coincide");
  }
  return centered / mean_norm;
}

// Coordinates (all x, then all y, then all z, in landmark order) followed by
// the distances d(i,j) for i < j in lexicographic order.
template <typename Derived>
Eigen::VectorXd geometric_vector(const Eigen::MatrixBase<Derived>& normalized) {
  const Eigen::Index n = normalized.rows();
  Eigen::VectorXd out(3 * n + n * (n - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index axis = 0; axis < 3; ++axis) {
    for (Eigen::Index i = 0; i < n; ++i) out[k++] = normalized(i, axis);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      out[k++] = (normalized.row(i) - normalized.row(j)).norm();
    }
  }
  return out;
}

// Geometric descriptor of one raw frame.
Eigen::VectorXd frame_descriptor(const LandmarkPoints& points);

struct WindowConfig {
  int window = 60;
  int overlap = 30;
};

// One sample per integer second: the frame nearest that second (earlier on ties).
struct SecondSamples {
  std::vector<std::size_t> frame_index;
  std::vector<std::uint8_t> valid;
};

SecondSamples downsample_per_second(const LandmarkSequence& sequence);

// Start offsets of windows of `window` samples advancing by window - overlap;
// windows containing an invalid sample are dropped.
std::vector<std::size_t> window_starts(std::span<const std::uint8_t> valid,
                                       const WindowConfig& config);

// Geometric descriptors of the per-second samples whose tracking succeeded.
Eigen::MatrixXd sampled_descriptors(const LandmarkSequence& sequence);

struct Window {
  std::string session_id;
  std::size_t start = 0;
  Eigen::MatrixXd samples;  // window x q
  double label = 0.0;       // NaN when the session is unlabeled
};

struct WindowBatch {
  WindowConfig config;
  Eigen::Index dimension = 0;
  std::vector<Window> windows;
};

WindowBatch window_sequence(const std::string& session_id, const LandmarkSequence& sequence,
                            const PcaProjection& pca, std::optional<double> label,
                            const WindowConfig& config = {});

// CSV intermediate. First line `# window=W overlap=O q=Q`, then
// `session_id,start,step,label,c0..c{q-1}`, one line per window sample.
void write_window_batch(const std::filesystem::path& path, const WindowBatch& batch);
WindowBatch read_window_batch(const std::filesystem::path& path);

struct SessionScore {
  double score = 0.0;
  bool used_fallback = false;
};

// Mean of window predictions, or `fallback` (flagged) when there is none.
SessionScore aggregate_predictions(std::span<const double> window_predictions, double fallback);

}  // namespace depsev::face
