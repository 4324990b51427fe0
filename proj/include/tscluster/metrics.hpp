#ifndef TSCLUSTER_METRICS_HPP
#define TSCLUSTER_METRICS_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tsc {

struct ReplicationMetrics {
  double mse_intercepts = 0.0;
  double mse_linear = 0.0;
  int n_clusters = 1;
  std::string method;
  int replication = 0;
};

struct MethodSummary {
  std::string method;
  int r_used = 0;
  double mse_intercepts = 0.0;
  double mse_linear = 0.0;
  double n_clusters = 0.0;
  // 10/90 percentile spread per metric, for the harness report.
  double p10_intercepts = 0.0, p90_intercepts = 0.0;
  double p10_linear = 0.0, p90_linear = 0.0;
  double p10_clusters = 0.0, p90_clusters = 0.0;
};

struct CellSummary {
  std::vector<MethodSummary> methods;
  int r = 0;  // replications aggregated
};

// Mean squared deviation of estimated from true per-unit intercepts.
double mse_intercepts(const std::vector<double>& estimated,
                      const std::vector<double>& truth);

// Half the squared-error sum over the two shared coefficients.
double mse_linear(const Eigen::Vector2d& estimated,
                  const Eigen::Vector2d& truth);

// Per-method arithmetic means plus 10/90 percentile spread. Methods appear
// in order of first occurrence.
CellSummary summarize_cell(const std::vector<ReplicationMetrics>& reps);

// Type-7 (linear interpolation) quantile of already-sorted values.
double quantile_type7(const std::vector<double>& sorted_values, double p);

}  // namespace tsc

#endif  // TSCLUSTER_METRICS_HPP
