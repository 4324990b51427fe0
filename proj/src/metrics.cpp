#include "tscluster/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "tscluster/errors.hpp"

namespace tsc {

double mse_intercepts(const std::vector<double>& estimated,
                      const std::vector<double>& truth) {
  if (estimated.size() != truth.size() || estimated.empty()) {
    throw LengthMismatch("intercept vectors differ in length");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    const double d = estimated[i] - truth[i];
    s += d * d;
  }
  return s / static_cast<double>(estimated.size());
}

double mse_linear(const Eigen::Vector2d& estimated,
                  const Eigen::Vector2d& truth) {
  return 0.5 * (estimated - truth).squaredNorm();
}

double quantile_type7(const std::vector<double>& sorted_values, double p) {
  if (sorted_values.empty()) throw LengthMismatch("empty quantile input");
  const auto m = sorted_values.size();
  if (m == 1) return sorted_values[0];
  const double h = (static_cast<double>(m) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= m) return sorted_values[m - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

CellSummary summarize_cell(const std::vector<ReplicationMetrics>& reps) {
  if (reps.empty()) throw LengthMismatch("no replication metrics");

  std::vector<std::string> methods;
  for (const auto& r : reps) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
    }
  }

  CellSummary summary;
  int max_count = 0;
  for (const auto& method : methods) {
    MethodSummary ms;
    ms.method = method;
    std::vector<double> vi, vl, vc;
    for (const auto& r : reps) {
      if (r.method != method) continue;
      vi.push_back(r.mse_intercepts);
      vl.push_back(r.mse_linear);
      vc.push_back(static_cast<double>(r.n_clusters));
    }
    ms.r_used = static_cast<int>(vi.size());
    max_count = std::max(max_count, ms.r_used);
    auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    ms.mse_intercepts = mean(vi);
    ms.mse_linear = mean(vl);
    ms.n_clusters = mean(vc);
    std::sort(vi.begin(), vi.end());
    std::sort(vl.begin(), vl.end());
    std::sort(vc.begin(), vc.end());
    ms.p10_intercepts = quantile_type7(vi, 0.10);
    ms.p90_intercepts = quantile_type7(vi, 0.90);
    ms.p10_linear = quantile_type7(vl, 0.10);
    ms.p90_linear = quantile_type7(vl, 0.90);
    ms.p10_clusters = quantile_type7(vc, 0.10);
    ms.p90_clusters = quantile_type7(vc, 0.90);
    summary.methods.push_back(std::move(ms));
  }
  summary.r = max_count;
  return summary;
}

}  // namespace tsc
