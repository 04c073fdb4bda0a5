#pragma once

#include <utility>

#include <Eigen/Dense>

namespace depsev::audio {

inline constexpr int kDeltaHalfWindow = 2;

// Regression delta over +-2 frames with replicated edges:
// d_t = sum_k k (x_{t+k} - x_{t-k}) / (2 sum_k k^2).
Eigen::VectorXd delta(const Eigen::Ref<const Eigen::VectorXd>& track);

// (delta, delta-delta). Throws ArgumentError for tracks shorter than 5.
std::pair<Eigen::VectorXd, Eigen::VectorXd> add_derivatives(
    const Eigen::Ref<const Eigen::VectorXd>& track);

}  // namespace depsev::audio
