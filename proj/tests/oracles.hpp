#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace depsev::testing {

// Direct transcription of the weight update with a full sort per instance.
inline Eigen::VectorXd relief_oracle(const Eigen::MatrixXd& x, const std::vector<int>& cls, int k) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  Eigen::VectorXd lo = x.colwise().minCoeff();
  Eigen::VectorXd range = x.colwise().maxCoeff().transpose() - lo;
  auto diff = [&](Eigen::Index f, Eigen::Index a, Eigen::Index b) {
    return range[f] > 0 ? std::abs(x(a, f) - x(b, f)) / range[f] : 0.0;
  };
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<std::pair<double, Eigen::Index>> hits, misses;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      double dist = 0;
      for (Eigen::Index f = 0; f < d; ++f) dist += diff(f, i, j);
      (cls[j] == cls[i] ? hits : misses).push_back({dist, j});
    }
    std::sort(hits.begin(), hits.end());
    std::sort(misses.begin(), misses.end());
    for (int r = 0; r < k; ++r) {
      for (Eigen::Index f = 0; f < d; ++f) {
        w[f] += (diff(f, i, misses[r].second) - diff(f, i, hits[r].second)) / double(n * k);
      }
    }
  }
  return w;
}

struct OracleSolution {
  Eigen::VectorXd beta;
  double bias_lo = 0.0;
  double bias_hi = 0.0;
};

// Exact dual solution by enumerating every point state (inside the tube, on
// either edge, at either bound) and keeping the one satisfying all KKT
// conditions.
inline std::optional<OracleSolution> svr_oracle(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                                         double c, double eps) {
  const Eigen::Index n = y.size();
  std::vector<int> state(static_cast<std::size_t>(n), 0);
  long combos = 1;
  for (Eigen::Index i = 0; i < n; ++i) combos *= 5;
  for (long code = 0; code < combos; ++code) {
    long rest = code;
    std::vector<Eigen::Index> free;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      state[static_cast<std::size_t>(i)] = static_cast<int>(rest % 5);
      rest /= 5;
      const int s = state[static_cast<std::size_t>(i)];
      if (s == 1 || s == 2) free.push_back(i);
      if (s == 3) beta[i] = c;
      if (s == 4) beta[i] = -c;
    }
    if (free.empty()) {
      // bias only bounded: any b in [lo, hi] is optimal
      double lo = -1e300, hi = 1e300;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double r = y[i] - k.row(i).dot(beta);
        const int s = state[static_cast<std::size_t>(i)];
        if (s == 0) { lo = std::max(lo, r - eps); hi = std::min(hi, r + eps); }
        if (s == 3) hi = std::min(hi, r - eps);
        if (s == 4) lo = std::max(lo, r + eps);
      }
      if (std::abs(beta.sum()) < 1e-12 && lo <= hi + 1e-9) return OracleSolution{beta, lo, hi};
      continue;
    }
    const auto m = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m + 1, m + 1);
    Eigen::VectorXd rhs(m + 1);
    for (Eigen::Index r = 0; r < m; ++r) {
      const Eigen::Index i = free[static_cast<std::size_t>(r)];
      const double sign = state[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
      for (Eigen::Index q = 0; q < m; ++q) a(r, q) = k(i, free[static_cast<std::size_t>(q)]);
      a(r, m) = 1.0;
      rhs[r] = y[i] - sign * eps - k.row(i).dot(beta);
    }
    a.row(m).head(m).setOnes();
    rhs[m] = -beta.sum();
    const Eigen::VectorXd sol = a.fullPivLu().solve(rhs);
    if (!(a * sol).isApprox(rhs, 1e-10)) continue;
    for (Eigen::Index r = 0; r < m; ++r) beta[free[static_cast<std::size_t>(r)]] = sol[r];
    const double b = sol[m];
    bool ok = true;
    for (Eigen::Index i = 0; i < n && ok; ++i) {
      const double resid = y[i] - k.row(i).dot(beta) - b;
      const double t = 1e-9;
      switch (state[static_cast<std::size_t>(i)]) {
        case 0: ok = std::abs(resid) <= eps + t; break;
        case 1: ok = beta[i] > 0 && beta[i] < c; break;
        case 2: ok = beta[i] < 0 && beta[i] > -c; break;
        case 3: ok = resid >= eps - t; break;
        case 4: ok = resid <= -eps + t; break;
      }
    }
    if (ok) return OracleSolution{beta, b, b};
  }
  return std::nullopt;
}

// Window starts by checking every offset.
inline std::vector<std::size_t> window_oracle(std::span<const std::uint8_t> valid, std::size_t window,
                                              std::size_t overlap) {
  const std::size_t stride = window - overlap;
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s < valid.size(); ++s) {
    if (s % stride || s + window > valid.size()) continue;
    bool ok = true;
    for (std::size_t k = s; k < s + window; ++k) ok = ok && valid[k];
    if (ok) starts.push_back(s);
  }
  return starts;
}

struct MetricOracle {
  double rmse = 0.0;
  double mae = 0.0;
  double evs = 0.0;
};

// Two-pass long-double formulas.
inline MetricOracle metrics_oracle(std::span<const double> y, std::span<const double> p) {
  const auto n = static_cast<long double>(y.size());
  long double se = 0, ae = 0, ym = 0, rm = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const long double r = static_cast<long double>(y[i]) - p[i];
    se += r * r;
    ae += std::fabs(r);
    ym += y[i];
    rm += r;
  }
  ym /= n;
  rm /= n;
  long double vy = 0, vr = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const long double r = static_cast<long double>(y[i]) - p[i];
    vy += (y[i] - ym) * (y[i] - ym);
    vr += (r - rm) * (r - rm);
  }
  return {static_cast<double>(std::sqrt(se / n)), static_cast<double>(ae / n),
          static_cast<double>(1.0L - vr / vy)};
}

}  // namespace depsev::testing
