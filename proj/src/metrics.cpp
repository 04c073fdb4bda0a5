#include "depsev/metrics.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "depsev/error.hpp"

namespace depsev {
namespace {

void check_lengths(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) {
    throw ArgumentError("length mismatch: " + std::to_string(y.size()) + " targets vs " +
                        std::to_string(yhat.size()) + " predictions");
  }
  if (y.size() < 2) throw ArgumentError("need at least 2 samples for metrics");
}

double population_variance(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size());
}

}  // namespace

ErrorMetrics compute_errors(std::span<const double> y, std::span<const double> yhat) {
  check_lengths(y, yhat);
  double sq = 0.0;
  double abs = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - yhat[i];
    sq += r * r;
    abs += std::abs(r);
  }
  const auto n = static_cast<double>(y.size());
  return {std::sqrt(sq / n), abs / n};
}

double explained_variance(std::span<const double> y, std::span<const double> yhat) {
  check_lengths(y, yhat);
  const double var_y = population_variance(y);
  if (var_y == 0.0) throw NumericError("explained variance undefined: Var(y) = 0");
  std::vector<double> residual(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) residual[i] = y[i] - yhat[i];
  return 1.0 - population_variance(residual) / var_y;
}

MetricReport compute_metrics(std::span<const double> y, std::span<const double> yhat) {
  const auto errors = compute_errors(y, yhat);
  return {errors.rmse, errors.mae, explained_variance(y, yhat)};
}

}  // namespace depsev
