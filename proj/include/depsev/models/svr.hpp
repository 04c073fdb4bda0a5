#pragma once

#include <string>

#include <Eigen/Dense>

#include "depsev/models/scaling.hpp"

namespace depsev::models {

enum class KernelType { Linear, Rbf };

std::string to_string(KernelType kernel);
KernelType parse_kernel(const std::string& text);

struct SvrConfig {
  KernelType kernel = KernelType::Rbf;
  double c = 1.0;
  double gamma = 0.01;
  double epsilon = 1e-3;
  // Stopping tolerance on the maximal KKT violation.
  double tolerance = 1e-3;
  long max_iterations = 0;  // 0: max(10^7, 100 * 2n)
};

struct SvrModel {
  SvrConfig config;
  MinMaxScaler scaler;
  Eigen::MatrixXd training_rows;  // normalized
  Eigen::VectorXd alpha;
  Eigen::VectorXd alpha_star;
  double bias = 0.0;
  long iterations = 0;

  Eigen::Index input_dim() const { return scaler.dim(); }
  Eigen::VectorXd coefficients() const { return alpha - alpha_star; }
};

double kernel_value(const SvrConfig& config, const Eigen::Ref<const Eigen::VectorXd>& a,
                    const Eigen::Ref<const Eigen::VectorXd>& b);

Eigen::MatrixXd kernel_matrix(const SvrConfig& config, const Eigen::Ref<const Eigen::MatrixXd>& rows);

// Epsilon-insensitive SVR solved in the dual by sequential pairwise
// (SMO-style) optimization. Inputs are min-max normalized with ranges kept in
// the model. Throws ArgumentError on bad shapes or parameters, NumericError on
// non-finite input or when the iteration cap is hit.
SvrModel svr_train(const Eigen::Ref<const Eigen::MatrixXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y, const SvrConfig& config = {});

double predict(const SvrModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd predict_rows(const SvrModel& model, const Eigen::Ref<const Eigen::MatrixXd>& rows);

// 1/2 c'Kc - y'c + eps * sum(alpha + alpha*), c = alpha - alpha*, on the
// normalized training rows.
double dual_objective(const SvrModel& model, const Eigen::Ref<const Eigen::VectorXd>& y);

}  // namespace depsev::models
