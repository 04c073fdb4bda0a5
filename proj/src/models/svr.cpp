#include "depsev/models/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "depsev/error.hpp"

namespace depsev::models {
namespace {

constexpr double kTau = 1e-12;

// Dual over 2n box-constrained variables: entries [0, n) carry alpha (sign
// +1), entries [n, 2n) carry alpha* (sign -1).
class SmoSolver {
 public:
  SmoSolver(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& y, const SvrConfig& config)
      : kernel_(kernel), n_(y.size()), l_(2 * y.size()), c_(config.c), tol_(config.tolerance) {
    beta_ = Eigen::VectorXd::Zero(l_);
    grad_ = Eigen::VectorXd(l_);
    sign_.resize(static_cast<std::size_t>(l_));
    for (Eigen::Index t = 0; t < n_; ++t) {
      grad_[t] = config.epsilon - y[t];
      grad_[t + n_] = config.epsilon + y[t];
      sign_[static_cast<std::size_t>(t)] = 1;
      sign_[static_cast<std::size_t>(t + n_)] = -1;
    }
  }

  long solve(long max_iterations) {
    long iter = 0;
    while (iter < max_iterations) {
      Eigen::Index i = -1;
      Eigen::Index j = -1;
      if (select_working_set(i, j)) return iter;
      update_pair(i, j);
      ++iter;
    }
    throw NumericError("SVR solver did not converge within " + std::to_string(max_iterations) +
                       " iterations (max KKT violation " + std::to_string(violation()) + ")");
  }

  double rho() const {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    int free = 0;
    for (Eigen::Index t = 0; t < l_; ++t) {
      const double yg = y(t) * grad_[t];
      if (upper(t)) {
        if (y(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else if (lower(t)) {
        if (y(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else {
        ++free;
        sum_free += yg;
      }
    }
    return free > 0 ? sum_free / free : (ub + lb) / 2.0;
  }

  const Eigen::VectorXd& beta() const { return beta_; }

 private:
  int y(Eigen::Index t) const { return sign_[static_cast<std::size_t>(t)]; }
  bool upper(Eigen::Index t) const { return beta_[t] >= c_; }
  bool lower(Eigen::Index t) const { return beta_[t] <= 0.0; }
  double k(Eigen::Index a, Eigen::Index b) const { return kernel_(a % n_, b % n_); }
  double q(Eigen::Index a, Eigen::Index b) const { return y(a) * y(b) * k(a, b); }

  double violation() const {
    double g_max = -std::numeric_limits<double>::infinity();
    double g_max2 = -std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < l_; ++t) {
      if (y(t) > 0) {
        if (!upper(t)) g_max = std::max(g_max, -grad_[t]);
        if (!lower(t)) g_max2 = std::max(g_max2, grad_[t]);
      } else {
        if (!lower(t)) g_max = std::max(g_max, grad_[t]);
        if (!upper(t)) g_max2 = std::max(g_max2, -grad_[t]);
      }
    }
    return g_max + g_max2;
  }

  // Maximal-violation i, second-order j. Returns true at optimality.
  bool select_working_set(Eigen::Index& out_i, Eigen::Index& out_j) const {
    double g_max = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < l_; ++t) {
      if (y(t) > 0) {
        if (!upper(t) && -grad_[t] >= g_max) { g_max = -grad_[t]; i = t; }
      } else {
        if (!lower(t) && grad_[t] >= g_max) { g_max = grad_[t]; i = t; }
      }
    }
    double g_max2 = -std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    for (Eigen::Index t = 0; t < l_; ++t) {
      double grad_diff = 0.0;
      if (y(t) > 0) {
        if (lower(t)) continue;
        grad_diff = g_max + grad_[t];
        g_max2 = std::max(g_max2, grad_[t]);
      } else {
        if (upper(t)) continue;
        grad_diff = g_max - grad_[t];
        g_max2 = std::max(g_max2, -grad_[t]);
      }
      if (i < 0 || grad_diff <= 0.0) continue;
      double quad = k(i, i) + k(t, t) - 2.0 * k(i, t);
      if (quad <= 0.0) quad = kTau;
      const double obj = -(grad_diff * grad_diff) / quad;
      if (obj <= best) { best = obj; j = t; }
    }
    if (i < 0 || j < 0 || g_max + g_max2 < tol_) return true;
    out_i = i;
    out_j = j;
    return false;
  }

  void update_pair(Eigen::Index i, Eigen::Index j) {
    const double old_i = beta_[i];
    const double old_j = beta_[j];
    double& ai = beta_[i];
    double& aj = beta_[j];
    const double qij = q(i, j);
    if (y(i) != y(j)) {
      double quad = k(i, i) + k(j, j) + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) { aj = 0.0; ai = diff; }
      } else {
        if (ai < 0.0) { ai = 0.0; aj = -diff; }
      }
      if (diff > 0.0) {
        if (ai > c_) { ai = c_; aj = c_ - diff; }
      } else {
        if (aj > c_) { aj = c_; ai = c_ + diff; }
      }
    } else {
      double quad = k(i, i) + k(j, j) - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c_) {
        if (ai > c_) { ai = c_; aj = sum - c_; }
      } else {
        if (aj < 0.0) { aj = 0.0; ai = sum; }
      }
      if (sum > c_) {
        if (aj > c_) { aj = c_; ai = sum - c_; }
      } else {
        if (ai < 0.0) { ai = 0.0; aj = sum; }
      }
    }
    const double d_i = ai - old_i;
    const double d_j = aj - old_j;
    for (Eigen::Index t = 0; t < l_; ++t) grad_[t] += q(t, i) * d_i + q(t, j) * d_j;
  }

  const Eigen::MatrixXd& kernel_;
  Eigen::Index n_;
  Eigen::Index l_;
  double c_;
  double tol_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd grad_;
  std::vector<int> sign_;
};

}  // namespace

std::string to_string(KernelType kernel) { return kernel == KernelType::Linear ? "linear" : "rbf"; }

KernelType parse_kernel(const std::string& text) {
  if (text == "linear") return KernelType::Linear;
  if (text == "rbf") return KernelType::Rbf;
  throw ArgumentError("unknown kernel '" + text + "'");
}

double kernel_value(const SvrConfig& config, const Eigen::Ref<const Eigen::VectorXd>& a,
                    const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (config.kernel == KernelType::Linear) return a.dot(b);
  return std::exp(-config.gamma * (a - b).squaredNorm());
}

Eigen::MatrixXd kernel_matrix(const SvrConfig& config, const Eigen::Ref<const Eigen::MatrixXd>& rows) {
  const Eigen::Index n = rows.rows();
  if (config.kernel == KernelType::Linear) return rows * rows.transpose();
  const Eigen::VectorXd sq = rows.rowwise().squaredNorm();
  Eigen::MatrixXd dist = (sq.replicate(1, n) + sq.transpose().replicate(n, 1)) -
                         2.0 * rows * rows.transpose();
  dist = dist.cwiseMax(0.0);
  dist.diagonal().setZero();
  return (-config.gamma * dist.array()).exp().matrix();
}

SvrModel svr_train(const Eigen::Ref<const Eigen::MatrixXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y, const SvrConfig& config) {
  if (x.rows() != y.size()) throw ArgumentError("svr_train: row/target count mismatch");
  if (x.rows() < 2) throw ArgumentError("svr_train needs at least 2 instances");
  if (!(config.c > 0.0)) throw ArgumentError("svr_train: C must be positive");
  if (!(config.epsilon >= 0.0)) throw ArgumentError("svr_train: epsilon must be nonnegative");
  if (config.kernel == KernelType::Rbf && !(config.gamma > 0.0)) {
    throw ArgumentError("svr_train: gamma must be positive");
  }
  if (!x.allFinite() || !y.allFinite()) throw NumericError("svr_train: non-finite input");

  SvrModel model;
  model.config = config;
  model.scaler = MinMaxScaler::fit(x);
  model.training_rows = model.scaler.transform(x);
  const Eigen::MatrixXd kernel = kernel_matrix(config, model.training_rows);

  const Eigen::Index n = y.size();
  const long cap = config.max_iterations > 0 ? config.max_iterations
                                             : std::max<long>(10'000'000L, 100L * 2 * n);
  SmoSolver solver(kernel, y, config);
  model.iterations = solver.solve(cap);
  model.alpha = solver.beta().head(n);
  model.alpha_star = solver.beta().tail(n);
  // At the optimum at most one of alpha_i, alpha*_i is nonzero; removing the
  // common part keeps alpha - alpha* and only lowers the objective.
  for (Eigen::Index i = 0; i < n; ++i) {
    const double common = std::min(model.alpha[i], model.alpha_star[i]);
    model.alpha[i] -= common;
    model.alpha_star[i] -= common;
  }
  model.bias = -solver.rho();
  return model;
}

double predict(const SvrModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.input_dim()) {
    throw ArgumentError("SVR input has dimension " + std::to_string(x.size()) + ", model expects " +
                        std::to_string(model.input_dim()));
  }
  const Eigen::VectorXd z = model.scaler.transform(x.transpose()).transpose();
  const Eigen::VectorXd coef = model.coefficients();
  double sum = model.bias;
  for (Eigen::Index i = 0; i < coef.size(); ++i) {
    if (coef[i] != 0.0) sum += coef[i] * kernel_value(model.config, model.training_rows.row(i).transpose(), z);
  }
  return sum;
}

Eigen::VectorXd predict_rows(const SvrModel& model, const Eigen::Ref<const Eigen::MatrixXd>& rows) {
  Eigen::VectorXd out(rows.rows());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) out[r] = predict(model, rows.row(r).transpose());
  return out;
}

double dual_objective(const SvrModel& model, const Eigen::Ref<const Eigen::VectorXd>& y) {
  const Eigen::VectorXd coef = model.coefficients();
  const Eigen::MatrixXd kernel = kernel_matrix(model.config, model.training_rows);
  return 0.5 * coef.dot(kernel * coef) - y.dot(coef) +
         model.config.epsilon * (model.alpha.sum() + model.alpha_star.sum());
}

}  // namespace depsev::models
