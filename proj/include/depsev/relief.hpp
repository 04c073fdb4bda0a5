#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace depsev::selection {

struct ReliefWeights {
  Eigen::VectorXd weights;
  int k = 0;
  Eigen::VectorXd feature_min;
  Eigen::VectorXd feature_range;  // 0 for constant features
};

// Binary classes from PHQ-8 scores (1 = depressed, score >= 10).
std::vector<int> binarize(std::span<const double> scores);

// Multi-neighbor Relief: k nearest hits and misses per instance under the
// Manhattan distance of min-max normalized features; each weight accumulates
// (diff to misses - diff to hits) / (n k). Constant features weigh 0. Throws
// ArgumentError naming the class when a class has fewer than k+1 members.
ReliefWeights relief_weights(const Eigen::Ref<const Eigen::MatrixXd>& features,
                             std::span<const int> classes, int k);

// Indices with weight > threshold, by descending weight (ties: lower index
// first), at most n_max of them.
std::vector<Eigen::Index> select_top(const Eigen::Ref<const Eigen::VectorXd>& weights,
                                     double threshold = 0.02, int n_max = 20);

// Trains on (X, y) and predicts the rows of the test matrix.
using FitPredict = std::function<Eigen::VectorXd(const Eigen::MatrixXd& train_x,
                                                 const Eigen::VectorXd& train_y,
                                                 const Eigen::MatrixXd& test_x)>;

struct ReliefGrid {
  std::vector<double> thresholds{0.02, 0.0, -0.02};
  std::vector<int> ks{5, 10, 15, 20};
  int n_max = 20;
  int folds = 3;
};

struct GridPoint {
  double threshold = 0.0;
  int k = 0;
  double mae = 0.0;
  bool skipped = false;
  std::string reason;
  double mean_selected = 0.0;
};

struct ReliefTuning {
  double threshold = 0.0;
  int k = 0;
  std::vector<GridPoint> grid;
};

// Grid search by stratified k-fold CV on the training data: per fold, Relief
// and selection are fitted on the fold's training part, the regressor is
// trained on the selected columns, and fold MAEs are averaged. An empty
// selection predicts the fold's training mean. Grid points whose folds are too
// small for k are skipped; throws when every point is skipped.
ReliefTuning tune_relief(const Eigen::Ref<const Eigen::MatrixXd>& features,
                         const Eigen::Ref<const Eigen::VectorXd>& targets, const ReliefGrid& grid,
                         const FitPredict& regressor, std::uint64_t seed);

}  // namespace depsev::selection
