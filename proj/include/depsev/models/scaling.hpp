#pragma once

#include <Eigen/Dense>

namespace depsev::models {

// Per-feature min-max map to [0, 1] fitted on training rows. Constant
// features map to 0.
struct MinMaxScaler {
  Eigen::VectorXd min;
  Eigen::VectorXd range;

  static MinMaxScaler fit(const Eigen::Ref<const Eigen::MatrixXd>& rows) {
    MinMaxScaler s;
    s.min = rows.colwise().minCoeff().transpose();
    s.range = rows.colwise().maxCoeff().transpose() - s.min;
    return s;
  }

  Eigen::Index dim() const { return min.size(); }

  template <typename Derived>
  Eigen::MatrixXd transform(const Eigen::MatrixBase<Derived>& rows) const {
    const Eigen::VectorXd inv = range.unaryExpr([](double r) { return r > 0.0 ? 1.0 / r : 0.0; });
    return (rows.rowwise() - min.transpose()) * inv.asDiagonal();
  }
};

}  // namespace depsev::models
