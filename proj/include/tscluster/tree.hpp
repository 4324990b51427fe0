#ifndef TSCLUSTER_TREE_HPP
#define TSCLUSTER_TREE_HPP

#include <optional>
#include <vector>

#include "tscluster/dataset.hpp"
#include "tscluster/glm.hpp"
#include "tscluster/partition.hpp"

namespace tsc {

struct ModelSpec {
  Family family = Family::gaussian();
  double alpha = 0.05;
  std::optional<int> max_splits;  // default: n - 1
  double ridge_ordering = 0.0;    // 0 = unpenalized with automatic fallback
  double ridge_fallback = kDefaultRidge;
};

struct CandidateStat {
  int threshold = 0;
  double statistic = 0.0;
  double p_value = 1.0;
};

struct SplitRecord {
  int step = 0;                // 1-based
  int chosen_threshold = 0;    // 0 when the step stopped without splitting
  std::vector<CandidateStat> candidate_stats;
  double global_stat = 0.0;
  int global_df = 0;           // n - step
  double global_p = 1.0;
  bool accepted = false;
};

struct TreeFit {
  ModelSpec spec;
  UnitOrder order;
  Partition partition;
  ClusterIntercepts cluster_intercepts;
  Eigen::VectorXd shared_beta;
  // Row r holds every unit's intercept after r accepted splits; row 0 is the
  // single global intercept.
  std::vector<std::vector<double>> path;
  std::vector<SplitRecord> records;
  double final_log_likelihood = 0.0;
  // True when the full fixed-effects model was inestimable unpenalized and
  // every model in this fit used the ridge fallback.
  bool stabilized = false;

  std::vector<double> unit_intercepts() const;
  int n_clusters() const { return partition.n_clusters(); }
};

// Tree-structured clustering of unit intercepts. Units are ordered once by
// their estimated intercepts; each step first runs the global heterogeneity
// test of the current clustered model against the full fixed-effects model
// (deviance difference on n - step chi-squared df) and stops when it is no
// longer significant; otherwise the adjacent split with the largest deviance
// reduction is accepted and all coefficients are refitted.
TreeFit fit_tsc(const Dataset& data, const ModelSpec& spec);

// Rectangular (accepted steps + 1) x n table of the per-unit intercept path.
std::vector<std::vector<double>> path_table(const TreeFit& fit);

}  // namespace tsc

#endif  // TSCLUSTER_TREE_HPP
