#include "tscluster/partition.hpp"

#include <algorithm>
#include <numeric>

#include "tscluster/errors.hpp"

namespace tsc {

namespace {

// Design for the per-unit intercept fit that drives the ordering: shared
// covariates followed by one dummy column per unit (no global intercept).
DesignMatrix ordering_design(const Dataset& data, bool shared_covariates) {
  const Eigen::Index nrows = data.n_rows();
  const Eigen::Index ncov = shared_covariates ? data.n_covariates() : 0;
  const int n = data.n_units();

  DesignMatrix design;
  design.X.setZero(nrows, ncov + n);
  for (Eigen::Index j = 0; j < ncov; ++j) {
    design.X.col(j) = data.covariates.col(j);
    design.roles.push_back(ColumnRole::SharedCovariate);
    design.thresholds.push_back(-1);
  }
  for (Eigen::Index i = 0; i < nrows; ++i) {
    design.X(i, ncov + data.unit_of_row[static_cast<std::size_t>(i)]) = 1.0;
  }
  for (int u = 0; u < n; ++u) {
    design.roles.push_back(ColumnRole::UnitDummy);
    design.thresholds.push_back(-1);
  }
  return design;
}

}  // namespace

UnitOrder order_units(const Dataset& data, Family family,
                      bool shared_covariates, double ridge_ordering,
                      double ridge_fallback) {
  data.validate();  // throws EmptyUnit
  const int n = data.n_units();
  const Eigen::Index ncov = shared_covariates ? data.n_covariates() : 0;
  const DesignMatrix design = ordering_design(data, shared_covariates);

  GlmFit fit;
  OrderBasis basis = OrderBasis::UnpenalizedML;
  if (ridge_ordering > 0.0) {
    fit = fit_glm(data.y, design, family, ridge_ordering);
    basis = OrderBasis::RidgeML;
  } else {
    bool fallback = false;
    try {
      fit = fit_glm(data.y, design, family, 0.0);
      fallback = !fit.converged;
    } catch (const RankDeficient&) {
      fallback = true;
    } catch (const Separation&) {
      fallback = true;
    }
    if (fallback) {
      fit = fit_glm(data.y, design, family, ridge_fallback);
      basis = OrderBasis::RidgeML;
    }
  }

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  const Eigen::VectorXd est = fit.coefficients.segment(ncov, n);
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) {
    if (est[a] != est[b]) return est[a] < est[b];
    return a < b;
  });

  UnitOrder order;
  order.permutation = std::move(perm);
  order.position_of.assign(static_cast<std::size_t>(n), 0);
  for (int pos = 0; pos < n; ++pos) {
    order.position_of[static_cast<std::size_t>(order.permutation
        [static_cast<std::size_t>(pos)])] = pos + 1;
  }
  order.basis = basis;
  return order;
}

DesignMatrix expand_design(const Dataset& data, const UnitOrder& order,
                           const std::vector<int>& active_thresholds,
                           std::optional<int> candidate) {
  const int n = order.n();
  auto check_range = [n](int c) {
    if (c < 1 || c > n - 1) {
      throw ThresholdOutOfRange("threshold " + std::to_string(c) +
                                " outside {1,...," + std::to_string(n - 1) +
                                "}");
    }
  };
  std::vector<int> active = active_thresholds;
  std::sort(active.begin(), active.end());
  for (std::size_t i = 0; i < active.size(); ++i) {
    check_range(active[i]);
    if (i > 0 && active[i] == active[i - 1]) {
      throw DuplicateThreshold("threshold " + std::to_string(active[i]) +
                               " listed twice");
    }
  }
  if (candidate) {
    check_range(*candidate);
    if (std::binary_search(active.begin(), active.end(), *candidate)) {
      throw DuplicateThreshold("candidate " + std::to_string(*candidate) +
                               " is already active");
    }
  }

  const Eigen::Index nrows = data.n_rows();
  const Eigen::Index ncov = data.n_covariates();
  const Eigen::Index ncols = ncov + 1 +
                             static_cast<Eigen::Index>(active.size()) +
                             (candidate ? 1 : 0);

  DesignMatrix design;
  design.X.resize(nrows, ncols);
  for (Eigen::Index j = 0; j < ncov; ++j) {
    design.X.col(j) = data.covariates.col(j);
    design.roles.push_back(ColumnRole::SharedCovariate);
    design.thresholds.push_back(-1);
  }
  design.X.col(ncov).setOnes();
  design.roles.push_back(ColumnRole::GlobalIntercept);
  design.thresholds.push_back(-1);

  std::vector<int> cols = active;
  if (candidate) cols.push_back(*candidate);
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const int c = cols[k];
    const Eigen::Index j = ncov + 1 + static_cast<Eigen::Index>(k);
    for (Eigen::Index i = 0; i < nrows; ++i) {
      const int unit = data.unit_of_row[static_cast<std::size_t>(i)];
      const int pos = order.position_of[static_cast<std::size_t>(unit)];
      design.X(i, j) = pos > c ? 1.0 : 0.0;
    }
    design.roles.push_back(ColumnRole::ThresholdIndicator);
    design.thresholds.push_back(c);
  }
  return design;
}

namespace {

int cluster_of_position(const std::vector<int>& boundaries, int pos) {
  int k = 0;
  for (int c : boundaries) {
    if (pos > c) ++k;
  }
  return k;
}

// Global intercept plus cumulative increments of the sorted-threshold
// coefficients.
std::vector<double> cluster_values(const DesignMatrix& design,
                                   const GlmFit& fit) {
  double beta0 = 0.0;
  std::vector<std::pair<int, double>> incs;  // (threshold, coefficient)
  for (Eigen::Index j = 0; j < design.cols(); ++j) {
    const auto role = design.roles[static_cast<std::size_t>(j)];
    if (role == ColumnRole::GlobalIntercept) beta0 = fit.coefficients[j];
    if (role == ColumnRole::ThresholdIndicator) {
      incs.emplace_back(design.thresholds[static_cast<std::size_t>(j)],
                        fit.coefficients[j]);
    }
  }
  std::sort(incs.begin(), incs.end());
  std::vector<double> values;
  values.reserve(incs.size() + 1);
  double acc = beta0;
  values.push_back(acc);
  for (const auto& [c, coef] : incs) {
    acc += coef;
    values.push_back(acc);
  }
  return values;
}

}  // namespace

Finalized finalize(const UnitOrder& order, const std::vector<int>& accepted,
                   const GlmFit& final_fit, const DesignMatrix& final_design) {
  std::vector<int> boundaries = accepted;
  std::sort(boundaries.begin(), boundaries.end());
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    if (boundaries[i] == boundaries[i - 1]) {
      throw DuplicateThreshold("accepted thresholds are not distinct");
    }
  }

  Finalized out;
  out.partition.order = order;
  out.partition.boundaries = boundaries;
  const int n = order.n();
  out.partition.cluster_of.assign(static_cast<std::size_t>(n), 0);
  for (int u = 0; u < n; ++u) {
    const int pos = order.position_of[static_cast<std::size_t>(u)];
    out.partition.cluster_of[static_cast<std::size_t>(u)] =
        cluster_of_position(boundaries, pos);
  }
  out.intercepts.values = cluster_values(final_design, final_fit);

  Eigen::Index nshared = 0;
  for (auto role : final_design.roles) {
    if (role == ColumnRole::SharedCovariate) ++nshared;
  }
  out.shared.resize(nshared);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < final_design.cols(); ++j) {
    if (final_design.roles[static_cast<std::size_t>(j)] ==
        ColumnRole::SharedCovariate) {
      out.shared[k++] = final_fit.coefficients[j];
    }
  }
  return out;
}

std::vector<double> assemble_unit_intercepts(const DesignMatrix& design,
                                             const GlmFit& fit,
                                             const UnitOrder& order) {
  const auto values = cluster_values(design, fit);
  std::vector<int> boundaries;
  for (Eigen::Index j = 0; j < design.cols(); ++j) {
    if (design.roles[static_cast<std::size_t>(j)] ==
        ColumnRole::ThresholdIndicator) {
      boundaries.push_back(design.thresholds[static_cast<std::size_t>(j)]);
    }
  }
  std::sort(boundaries.begin(), boundaries.end());

  const int n = order.n();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) {
    const int pos = order.position_of[static_cast<std::size_t>(u)];
    out[static_cast<std::size_t>(u)] =
        values[static_cast<std::size_t>(cluster_of_position(boundaries, pos))];
  }
  return out;
}

}  // namespace tsc
