#include "depsev/audio/derivatives.hpp"

#include <algorithm>

#include "depsev/error.hpp"

namespace depsev::audio {

Eigen::VectorXd delta(const Eigen::Ref<const Eigen::VectorXd>& track) {
  const Eigen::Index n = track.size();
  Eigen::VectorXd out(n);
  double norm = 0.0;
  for (int k = 1; k <= kDeltaHalfWindow; ++k) norm += 2.0 * k * k;
  auto at = [&](Eigen::Index i) { return track[std::clamp<Eigen::Index>(i, 0, n - 1)]; };
  for (Eigen::Index t = 0; t < n; ++t) {
    double acc = 0.0;
    for (int k = 1; k <= kDeltaHalfWindow; ++k) acc += k * (at(t + k) - at(t - k));
    out[t] = acc / norm;
  }
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> add_derivatives(
    const Eigen::Ref<const Eigen::VectorXd>& track) {
  if (track.size() < 2 * kDeltaHalfWindow + 1) {
    throw ArgumentError("derivatives need a track of at least 5 frames");
  }
  Eigen::VectorXd first = delta(track);
  Eigen::VectorXd second = delta(first);
  return {std::move(first), std::move(second)};
}

}  // namespace depsev::audio
