#pragma once

#include <span>

namespace depsev {

struct MetricReport {
  double rmse = 0.0;
  double mae = 0.0;
  double evs = 0.0;
};

struct ErrorMetrics {
  double rmse = 0.0;
  double mae = 0.0;
};

// RMSE and MAE only; defined whenever |y| = |yhat| >= 2.
ErrorMetrics compute_errors(std::span<const double> y, std::span<const double> yhat);

// Explained variance 1 - Var(y - yhat) / Var(y) with population variances.
// Throws NumericError when Var(y) == 0.
double explained_variance(std::span<const double> y, std::span<const double> yhat);

MetricReport compute_metrics(std::span<const double> y, std::span<const double> yhat);

}  // namespace depsev
