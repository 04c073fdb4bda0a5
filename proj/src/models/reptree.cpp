#include "depsev/models/reptree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "depsev/error.hpp"
#include "depsev/random.hpp"

namespace depsev::models {
namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

double sse_of(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& idx) {
  if (idx.empty()) return 0.0;
  double mean = 0.0;
  for (auto i : idx) mean += y[i];
  mean /= static_cast<double>(idx.size());
  double s = 0.0;
  for (auto i : idx) s += (y[i] - mean) * (y[i] - mean);
  return s;
}

Split best_split(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                 const std::vector<Eigen::Index>& idx, int min_leaf, double parent_sse) {
  Split best;
  const auto n = idx.size();
  std::vector<Eigen::Index> order(idx);
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return x(a, f) < x(b, f); });
    double left_sum = 0.0;
    double left_sq = 0.0;
    double total_sum = 0.0;
    double total_sq = 0.0;
    for (auto i : order) {
      total_sum += y[i];
      total_sq += y[i] * y[i];
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      const double v = y[order[p]];
      left_sum += v;
      left_sq += v * v;
      const std::size_t nl = p + 1;
      const std::size_t nr = n - nl;
      if (nl < static_cast<std::size_t>(min_leaf) || nr < static_cast<std::size_t>(min_leaf)) {
        continue;
      }
      const double a = x(order[p], f);
      const double b = x(order[p + 1], f);
      if (!(b > a)) continue;
      const double right_sum = total_sum - left_sum;
      const double right_sq = total_sq - left_sq;
      const double sse_l = std::max(0.0, left_sq - left_sum * left_sum / nl);
      const double sse_r = std::max(0.0, right_sq - right_sum * right_sum / nr);
      const double gain = parent_sse - sse_l - sse_r;
      if (gain > best.gain) {
        best.gain = gain;
        best.feature = static_cast<int>(f);
        best.threshold = a + (b - a) / 2.0;
      }
    }
  }
  return best;
}

int route(const std::vector<RepTreeNode>& nodes, const Eigen::Ref<const Eigen::VectorXd>& x) {
  int node = 0;
  while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
    const auto& n = nodes[static_cast<std::size_t>(node)];
    node = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return node;
}

// Copies the subtree reachable from `node` into `out`, returning its new index.
int compact(const std::vector<RepTreeNode>& nodes, int node, std::vector<RepTreeNode>& out) {
  const int index = static_cast<int>(out.size());
  out.push_back(nodes[static_cast<std::size_t>(node)]);
  if (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
    const int l = compact(nodes, nodes[static_cast<std::size_t>(node)].left, out);
    const int r = compact(nodes, nodes[static_cast<std::size_t>(node)].right, out);
    out[static_cast<std::size_t>(index)].left = l;
    out[static_cast<std::size_t>(index)].right = r;
  }
  return index;
}

}  // namespace

int RepTreeModel::leaf_count() const {
  std::function<int(int)> count = [&](int node) {
    const auto& n = nodes[static_cast<std::size_t>(node)];
    return n.is_leaf() ? 1 : count(n.left) + count(n.right);
  };
  return nodes.empty() ? 0 : count(0);
}

int RepTreeModel::depth() const {
  std::function<int(int)> d = [&](int node) {
    const auto& n = nodes[static_cast<std::size_t>(node)];
    return n.is_leaf() ? 0 : 1 + std::max(d(n.left), d(n.right));
  };
  return nodes.empty() ? 0 : d(0);
}

GrowPruneSplit split_grow_prune(Eigen::Index n, double prune_fraction, std::uint64_t seed) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<Eigen::Index>(order));
  const auto prune_count = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::lround(static_cast<double>(n) * prune_fraction)), 1, n - 1);
  GrowPruneSplit split;
  split.grow.assign(order.begin(), order.end() - prune_count);
  split.prune.assign(order.end() - prune_count, order.end());
  return split;
}

RepTreeModel reptree_train(const Eigen::Ref<const Eigen::MatrixXd>& x_in,
                           const Eigen::Ref<const Eigen::VectorXd>& y_in,
                           const RepTreeConfig& config, std::uint64_t seed) {
  if (x_in.rows() != y_in.size()) throw ArgumentError("reptree_train: row/target count mismatch");
  if (x_in.rows() < 6) throw ArgumentError("reptree_train needs at least 6 instances");
  if (config.min_leaf < 1) throw ArgumentError("reptree_train: min_leaf must be positive");
  if (!(config.prune_fraction > 0.0 && config.prune_fraction < 1.0)) {
    throw ArgumentError("reptree_train: prune_fraction must lie in (0, 1)");
  }
  if (!x_in.allFinite() || !y_in.allFinite()) throw NumericError("reptree_train: non-finite input");
  const Eigen::MatrixXd x = x_in;
  const Eigen::VectorXd y = y_in;

  RepTreeModel model;
  model.config = config;
  model.seed = seed;
  model.input_dim = x.cols();
  const auto split = split_grow_prune(x.rows(), config.prune_fraction, seed);

  const double root_variance = sse_of(y, split.grow) / static_cast<double>(split.grow.size());
  std::vector<RepTreeNode> nodes;
  std::function<int(const std::vector<Eigen::Index>&, int)> grow =
      [&](const std::vector<Eigen::Index>& idx, int depth) -> int {
    RepTreeNode node;
    double sum = 0.0;
    for (auto i : idx) sum += y[i];
    node.value = sum / static_cast<double>(idx.size());
    node.growing_count = static_cast<int>(idx.size());
    const int index = static_cast<int>(nodes.size());
    nodes.push_back(node);

    const double sse = sse_of(y, idx);
    const double variance = sse / static_cast<double>(idx.size());
    if (idx.size() < 2 * static_cast<std::size_t>(config.min_leaf) ||
        variance <= config.min_variance_prop * root_variance ||
        (config.max_depth >= 0 && depth >= config.max_depth)) {
      return index;
    }
    const Split s = best_split(x, y, idx, config.min_leaf, sse);
    if (s.feature < 0) return index;
    std::vector<Eigen::Index> left;
    std::vector<Eigen::Index> right;
    for (auto i : idx) (x(i, s.feature) <= s.threshold ? left : right).push_back(i);
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& stored = nodes[static_cast<std::size_t>(index)];
    stored.feature = s.feature;
    stored.threshold = s.threshold;
    stored.left = l;
    stored.right = r;
    return index;
  };
  grow(split.grow, 0);

  auto pruning_sse = [&](const std::vector<RepTreeNode>& tree) {
    double s = 0.0;
    for (auto i : split.prune) {
      const double r = y[i] - tree[static_cast<std::size_t>(route(tree, x.row(i).transpose()))].value;
      s += r * r;
    }
    return s;
  };
  model.pruning_sse_before = pruning_sse(nodes);

  if (config.prune) {
    // Returns the pruning-set SSE of the (possibly pruned) subtree at `node`.
    std::function<double(int, const std::vector<Eigen::Index>&)> prune =
        [&](int node, const std::vector<Eigen::Index>& idx) -> double {
      auto& n = nodes[static_cast<std::size_t>(node)];
      double leaf_sse = 0.0;
      for (auto i : idx) leaf_sse += (y[i] - n.value) * (y[i] - n.value);
      if (n.is_leaf()) return leaf_sse;
      std::vector<Eigen::Index> left;
      std::vector<Eigen::Index> right;
      for (auto i : idx) (x(i, n.feature) <= n.threshold ? left : right).push_back(i);
      const int l = n.left;
      const int r = n.right;
      const double subtree_sse = prune(l, left) + prune(r, right);
      auto& again = nodes[static_cast<std::size_t>(node)];
      if (leaf_sse <= subtree_sse) {
        again.feature = -1;
        again.left = again.right = -1;
        return leaf_sse;
      }
      return subtree_sse;
    };
    prune(0, split.prune);
  }
  std::vector<RepTreeNode> compacted;
  compact(nodes, 0, compacted);
  model.nodes = std::move(compacted);
  model.pruning_sse_after = pruning_sse(model.nodes);
  return model;
}

double predict(const RepTreeModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.input_dim) {
    throw ArgumentError("tree input has dimension " + std::to_string(x.size()) +
                        ", model expects " + std::to_string(model.input_dim));
  }
  return model.nodes[static_cast<std::size_t>(route(model.nodes, x))].value;
}

Eigen::VectorXd predict_rows(const RepTreeModel& model, const Eigen::Ref<const Eigen::MatrixXd>& rows) {
  Eigen::VectorXd out(rows.rows());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) out[r] = predict(model, rows.row(r).transpose());
  return out;
}

}  // namespace depsev::models
