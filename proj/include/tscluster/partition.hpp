#ifndef TSCLUSTER_PARTITION_HPP
#define TSCLUSTER_PARTITION_HPP

#include <optional>
#include <vector>

#include "tscluster/dataset.hpp"
#include "tscluster/glm.hpp"

namespace tsc {

enum class OrderBasis { UnpenalizedML, RidgeML };

// Units sorted ascending by their estimated intercepts. Positions are
// 1-based: permutation[k] is the (0-based) unit at position k+1.
struct UnitOrder {
  std::vector<int> permutation;
  std::vector<int> position_of;  // unit -> 1-based position
  OrderBasis basis = OrderBasis::UnpenalizedML;

  int n() const { return static_cast<int>(permutation.size()); }
};

// Contiguous blocks of the ordered units. Boundaries are strictly increasing
// thresholds in {1,...,n-1}; cluster k (0-based) covers positions
// (boundaries[k-1], boundaries[k]].
struct Partition {
  UnitOrder order;
  std::vector<int> boundaries;
  std::vector<int> cluster_of;  // unit -> 0-based cluster

  int n_clusters() const { return static_cast<int>(boundaries.size()) + 1; }
};

struct ClusterIntercepts {
  std::vector<double> values;  // one per cluster, ascending cluster index
};

// Orders units by the intercept estimates of the full fixed-effects model.
// ridge_ordering > 0 fits penalized directly; otherwise the unpenalized fit
// is tried first and RankDeficient/Separation/non-convergence falls back to
// ridge_fallback. Ties break by original unit index.
UnitOrder order_units(const Dataset& data, Family family,
                      bool shared_covariates, double ridge_ordering = 0.0,
                      double ridge_fallback = kDefaultRidge);

// Builds the candidate-model design: shared covariates, one global
// intercept, one indicator column per active threshold (ascending), and the
// optional candidate indicator last. I(position > c) indexes the ordering.
DesignMatrix expand_design(const Dataset& data, const UnitOrder& order,
                           const std::vector<int>& active_thresholds,
                           std::optional<int> candidate = std::nullopt);

struct Finalized {
  Partition partition;
  ClusterIntercepts intercepts;
  Eigen::VectorXd shared;  // shared-covariate coefficients
};

// Assembles the clustering from accepted thresholds and the final refit:
// cluster k's intercept is the global intercept plus the cumulative
// increments of the sorted-threshold coefficients.
Finalized finalize(const UnitOrder& order, const std::vector<int>& accepted,
                   const GlmFit& final_fit, const DesignMatrix& final_design);

// Per-unit intercepts implied by a fitted threshold model (used for the
// coefficient path).
std::vector<double> assemble_unit_intercepts(const DesignMatrix& design,
                                             const GlmFit& fit,
                                             const UnitOrder& order);

}  // namespace tsc

#endif  // TSCLUSTER_PARTITION_HPP
