#pragma once

#include <filesystem>

#include <Eigen/Dense>

namespace depsev {

struct PcaProjection {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;   // q x d, orthonormal rows, descending variance
  Eigen::VectorXd eigenvalues;  // all nonnegative covariance eigenvalues, descending
  double explained_ratio = 0.0;

  Eigen::Index input_dim() const { return mean.size(); }
  Eigen::Index dim() const { return components.rows(); }

  Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  // Row-wise projection.
  Eigen::MatrixXd project_rows(const Eigen::Ref<const Eigen::MatrixXd>& rows) const;
  Eigen::MatrixXd reconstruct_rows(const Eigen::Ref<const Eigen::MatrixXd>& scores) const;
};

// Keeps the smallest q whose cumulative explained variance reaches
// `variance_keep`. Covariance uses 1/(n-1); when rows < columns the
// eigenproblem is solved on the Gram matrix instead. Throws on fewer than two
// rows, variance_keep outside (0,1], or zero total variance.
PcaProjection fit_pca(const Eigen::Ref<const Eigen::MatrixXd>& rows, double variance_keep = 0.995);

// Streaming covariance for inputs too large to hold as one matrix. fit()
// matches fit_pca on the stacked rows up to rounding.
class PcaAccumulator {
 public:
  void add(const Eigen::Ref<const Eigen::MatrixXd>& rows);
  Eigen::Index count() const { return count_; }
  PcaProjection fit(double variance_keep = 0.995) const;

 private:
  Eigen::Index count_ = 0;
  Eigen::VectorXd shift_;
  Eigen::VectorXd sum_;
  Eigen::MatrixXd scatter_;  // lower triangle of sum of shifted outer products
};

void save_pca(const std::filesystem::path& path, const PcaProjection& pca);
PcaProjection load_pca(const std::filesystem::path& path);

}  // namespace depsev
