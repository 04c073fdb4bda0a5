#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace depsev::models {

struct RepTreeConfig {
  int min_leaf = 2;
  double prune_fraction = 1.0 / 3.0;
  // A node whose growing-set variance is at most this fraction of the root
  // variance becomes a leaf.
  double min_variance_prop = 1e-3;
  int max_depth = -1;  // unlimited
  bool prune = true;
};

struct RepTreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // x[feature] <= threshold goes left
  double value = 0.0;      // mean growing-set target
  int left = -1;
  int right = -1;
  int growing_count = 0;

  bool is_leaf() const { return feature < 0; }
};

struct RepTreeModel {
  RepTreeConfig config;
  std::uint64_t seed = 0;
  Eigen::Index input_dim = 0;
  std::vector<RepTreeNode> nodes;  // nodes[0] is the root
  double pruning_sse_before = 0.0;
  double pruning_sse_after = 0.0;

  int leaf_count() const;
  int depth() const;
};

struct GrowPruneSplit {
  std::vector<Eigen::Index> grow;
  std::vector<Eigen::Index> prune;
};

// Seeded shuffle; the last round(n * prune_fraction) (at least 1) go to pruning.
GrowPruneSplit split_grow_prune(Eigen::Index n, double prune_fraction, std::uint64_t seed);

// Greedy variance-reduction tree over midpoint thresholds, then bottom-up
// reduced-error pruning on the held-out part: a subtree becomes a leaf when
// that does not increase the pruning-set squared error. Needs n >= 6.
RepTreeModel reptree_train(const Eigen::Ref<const Eigen::MatrixXd>& x,
                           const Eigen::Ref<const Eigen::VectorXd>& y,
                           const RepTreeConfig& config = {}, std::uint64_t seed = 1);

double predict(const RepTreeModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd predict_rows(const RepTreeModel& model, const Eigen::Ref<const Eigen::MatrixXd>& rows);

}  // namespace depsev::models
