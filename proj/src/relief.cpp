#include "depsev/relief.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "depsev/error.hpp"
#include "depsev/folds.hpp"
#include "depsev/random.hpp"
#include "depsev/types.hpp"

namespace depsev {

std::vector<int> stratified_folds(std::span<const int> classes, int folds, std::uint64_t seed) {
  if (folds < 2) throw ArgumentError("need at least two folds");
  if (classes.size() < static_cast<std::size_t>(folds)) {
    throw ArgumentError("fewer instances (" + std::to_string(classes.size()) + ") than folds (" +
                        std::to_string(folds) + ")");
  }
  std::vector<int> labels(classes.begin(), classes.end());
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  Rng rng(seed);
  std::vector<int> assignment(classes.size(), 0);
  int next = 0;
  for (int label : labels) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < classes.size(); ++i) {
      if (classes[i] == label) members.push_back(i);
    }
    rng.shuffle(std::span<std::size_t>(members));
    for (auto i : members) {
      assignment[i] = next;
      next = (next + 1) % folds;
    }
  }
  return assignment;
}

namespace selection {

std::vector<int> binarize(std::span<const double> scores) {
  std::vector<int> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(is_depressed(s) ? 1 : 0);
  return out;
}

ReliefWeights relief_weights(const Eigen::Ref<const Eigen::MatrixXd>& features,
                             std::span<const int> classes, int k) {
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  if (static_cast<std::size_t>(n) != classes.size()) {
    throw ArgumentError("relief: " + std::to_string(n) + " rows but " +
                        std::to_string(classes.size()) + " class labels");
  }
  if (k < 1) throw ArgumentError("relief: k must be positive");
  std::vector<int> labels(classes.begin(), classes.end());
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  if (labels.size() != 2) throw ArgumentError("relief needs exactly two classes");
  for (int label : labels) {
    const auto count = std::count(classes.begin(), classes.end(), label);
    if (count < k + 1) {
      throw ArgumentError("relief: class " + std::to_string(label) + " has " +
                          std::to_string(count) + " instances, need k+1 = " +
                          std::to_string(k + 1));
    }
  }

  ReliefWeights out;
  out.k = k;
  out.feature_min = features.colwise().minCoeff().transpose();
  out.feature_range = features.colwise().maxCoeff().transpose() - out.feature_min;
  const Eigen::VectorXd inv_range =
      out.feature_range.unaryExpr([](double r) { return r > 0.0 ? 1.0 / r : 0.0; });
  // Normalized copy; constant columns collapse to 0 so they never differ.
  const Eigen::MatrixXd x =
      (features.rowwise() - out.feature_min.transpose()) * inv_range.asDiagonal();

  Eigen::VectorXd accum = Eigen::VectorXd::Zero(d);
  std::vector<std::pair<double, Eigen::Index>> hits;
  std::vector<std::pair<double, Eigen::Index>> misses;
  for (Eigen::Index i = 0; i < n; ++i) {
    hits.clear();
    misses.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dist = (x.row(i) - x.row(j)).cwiseAbs().sum();
      (classes[static_cast<std::size_t>(j)] == classes[static_cast<std::size_t>(i)] ? hits : misses)
          .emplace_back(dist, j);
    }
    std::partial_sort(hits.begin(), hits.begin() + k, hits.end());
    std::partial_sort(misses.begin(), misses.begin() + k, misses.end());
    for (int m = 0; m < k; ++m) {
      accum += (x.row(i) - x.row(misses[static_cast<std::size_t>(m)].second)).cwiseAbs().transpose();
      accum -= (x.row(i) - x.row(hits[static_cast<std::size_t>(m)].second)).cwiseAbs().transpose();
    }
  }
  out.weights = accum / (static_cast<double>(n) * k);
  return out;
}

std::vector<Eigen::Index> select_top(const Eigen::Ref<const Eigen::VectorXd>& weights,
                                     double threshold, int n_max) {
  std::vector<Eigen::Index> picked;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights[i] > threshold) picked.push_back(i);
  }
  std::stable_sort(picked.begin(), picked.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return weights[a] > weights[b]; });
  if (picked.size() > static_cast<std::size_t>(std::max(n_max, 0))) {
    picked.resize(static_cast<std::size_t>(std::max(n_max, 0)));
  }
  return picked;
}

ReliefTuning tune_relief(const Eigen::Ref<const Eigen::MatrixXd>& features,
                         const Eigen::Ref<const Eigen::VectorXd>& targets, const ReliefGrid& grid,
                         const FitPredict& regressor, std::uint64_t seed) {
  if (grid.thresholds.empty() || grid.ks.empty()) throw ArgumentError("empty Relief grid");
  const Eigen::Index n = features.rows();
  std::vector<double> y(targets.data(), targets.data() + n);
  const auto classes = binarize(y);
  const auto fold_of = stratified_folds(classes, grid.folds, seed);

  ReliefTuning tuning;
  double best = std::numeric_limits<double>::infinity();
  for (int k : grid.ks) {
    for (double threshold : grid.thresholds) {
      GridPoint point{threshold, k, 0.0, false, {}, 0.0};
      double abs_error = 0.0;
      for (int fold = 0; fold < grid.folds && !point.skipped; ++fold) {
        std::vector<Eigen::Index> train;
        std::vector<Eigen::Index> test;
        for (Eigen::Index i = 0; i < n; ++i) {
          (fold_of[static_cast<std::size_t>(i)] == fold ? test : train).push_back(i);
        }
        const Eigen::MatrixXd train_x = features(train, Eigen::all);
        const Eigen::VectorXd train_y = targets(train);
        std::vector<int> train_classes;
        for (auto i : train) train_classes.push_back(classes[static_cast<std::size_t>(i)]);
        std::vector<Eigen::Index> selected;
        try {
          const auto weights = relief_weights(train_x, train_classes, k);
          selected = select_top(weights.weights, threshold, grid.n_max);
        } catch (const ArgumentError& e) {
          point.skipped = true;
          point.reason = e.what();
          break;
        }
        point.mean_selected += static_cast<double>(selected.size()) / grid.folds;
        Eigen::VectorXd predicted;
        if (selected.empty()) {
          predicted = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(test.size()), train_y.mean());
        } else {
          predicted = regressor(train_x(Eigen::all, selected), train_y,
                                features(test, selected));
        }
        abs_error += (predicted - targets(test)).cwiseAbs().mean() / grid.folds;
      }
      if (!point.skipped) {
        point.mae = abs_error;
        if (point.mae < best) {
          best = point.mae;
          tuning.threshold = threshold;
          tuning.k = k;
        }
      }
      tuning.grid.push_back(point);
    }
  }
  if (!std::isfinite(best)) throw ArgumentError("every Relief grid point was skipped");
  return tuning;
}

}  // namespace selection
}  // namespace depsev
