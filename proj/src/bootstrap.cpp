#include "tscluster/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "tscluster/errors.hpp"
#include "tscluster/metrics.hpp"
#include "tscluster/rng.hpp"

namespace tsc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Cell-means design on the original fit's clusters: shared covariates plus
// one dummy per cluster that is present in the replicate. `present` reports
// which clusters made it into the resample.
DesignMatrix cluster_dummy_design(const Dataset& replicate,
                                  const std::vector<int>& cluster_of_unit,
                                  int n_clusters,
                                  std::vector<bool>& present) {
  present.assign(static_cast<std::size_t>(n_clusters), false);
  for (int c : cluster_of_unit) present[static_cast<std::size_t>(c)] = true;
  std::vector<int> column_of(static_cast<std::size_t>(n_clusters), -1);
  int ncl = 0;
  for (int k = 0; k < n_clusters; ++k) {
    if (present[static_cast<std::size_t>(k)]) column_of[static_cast<std::size_t>(k)] = ncl++;
  }

  const Eigen::Index nrows = replicate.n_rows();
  const Eigen::Index ncov = replicate.n_covariates();
  DesignMatrix design;
  design.X.setZero(nrows, ncov + ncl);
  for (Eigen::Index j = 0; j < ncov; ++j) {
    design.X.col(j) = replicate.covariates.col(j);
    design.roles.push_back(ColumnRole::SharedCovariate);
    design.thresholds.push_back(-1);
  }
  for (Eigen::Index i = 0; i < nrows; ++i) {
    const int unit = replicate.unit_of_row[static_cast<std::size_t>(i)];
    const int cl = cluster_of_unit[static_cast<std::size_t>(unit)];
    design.X(i, ncov + column_of[static_cast<std::size_t>(cl)]) = 1.0;
  }
  for (int k = 0; k < ncl; ++k) {
    design.roles.push_back(ColumnRole::UnitDummy);
    design.thresholds.push_back(-1);
  }
  return design;
}

}  // namespace

namespace {

// One replicate: resample units, refit the tree, refit the original
// partition's cluster dummies. Writes its row of `replicates`; returns false
// on failure.
bool run_replicate(const Dataset& data, const ModelSpec& spec,
                   const TreeFit& original, std::uint64_t seed, int b,
                   const std::vector<std::vector<Eigen::Index>>& rows_of,
                   Eigen::MatrixXd& replicates) {
  const int n = data.n_units();
  const int m = original.n_clusters();
  const auto ncov = data.n_covariates();

  Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(b));
  // Unit-level resample: each drawn unit carries all its rows.
  std::vector<int> draws(static_cast<std::size_t>(n));
  for (auto& d : draws) {
    d = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
  }
  Dataset rep;
  {
    Eigen::Index total = 0;
    for (int d : draws) {
      total += static_cast<Eigen::Index>(
          rows_of[static_cast<std::size_t>(d)].size());
    }
    rep.y.resize(total);
    rep.covariates.resize(total, ncov);
    rep.covariate_names = data.covariate_names;
    Eigen::Index r = 0;
    for (int k = 0; k < n; ++k) {
      rep.unit_names.push_back("b" + std::to_string(k + 1));
      for (Eigen::Index src : rows_of[static_cast<std::size_t>(
               draws[static_cast<std::size_t>(k)])]) {
        rep.y[r] = data.y[src];
        rep.covariates.row(r) = data.covariates.row(src);
        rep.unit_of_row.push_back(k);
        ++r;
      }
    }
  }

  try {
    const TreeFit fit = fit_tsc(rep, spec);
    for (Eigen::Index j = 0; j < ncov; ++j) {
      replicates(b, j) = fit.shared_beta[j];
    }

    // Cluster intercepts conditioned on the original partition: the drawn
    // units keep their original cluster labels.
    std::vector<int> cluster_of_unit(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      cluster_of_unit[static_cast<std::size_t>(k)] =
          original.partition.cluster_of[static_cast<std::size_t>(
              draws[static_cast<std::size_t>(k)])];
    }
    std::vector<bool> present;
    const DesignMatrix cd =
        cluster_dummy_design(rep, cluster_of_unit, m, present);
    GlmFit cfit;
    try {
      cfit = fit_glm(rep.y, cd, spec.family, 0.0);
      if (!cfit.converged) {
        cfit = fit_glm(rep.y, cd, spec.family, spec.ridge_fallback);
      }
    } catch (const RankDeficient&) {
      cfit = fit_glm(rep.y, cd, spec.family, spec.ridge_fallback);
    } catch (const Separation&) {
      cfit = fit_glm(rep.y, cd, spec.family, spec.ridge_fallback);
    }
    Eigen::Index col = ncov;
    for (int k = 0; k < m; ++k) {
      if (present[static_cast<std::size_t>(k)]) {
        replicates(b, ncov + k) = cfit.coefficients[col++];
      }
    }
    return true;
  } catch (const Error&) {
    replicates.row(b).setConstant(kNaN);
    return false;
  }
}

}  // namespace

BootstrapResult bootstrap_ci(const Dataset& data, const ModelSpec& spec,
                             int B, double level, std::uint64_t seed,
                             int threads) {
  if (B < 2) throw InputError("bootstrap needs B >= 2");
  if (!(level > 0.0 && level < 1.0)) {
    throw InputError("bootstrap level must lie in (0,1)");
  }

  const TreeFit original = fit_tsc(data, spec);
  const int n = data.n_units();
  const int m = original.n_clusters();
  const auto ncov = data.n_covariates();
  const Eigen::Index nparam = ncov + m;

  std::vector<std::vector<Eigen::Index>> rows_of(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
    rows_of[static_cast<std::size_t>(
        data.unit_of_row[static_cast<std::size_t>(i)])].push_back(i);
  }

  BootstrapResult result;
  result.b_requested = B;
  result.replicates.setConstant(B, nparam, kNaN);
  std::vector<char> ok(static_cast<std::size_t>(B), 0);

  const int workers = std::max(1, std::min(threads, B));
  if (workers == 1) {
    for (int b = 0; b < B; ++b) {
      ok[static_cast<std::size_t>(b)] = run_replicate(
          data, spec, original, seed, b, rows_of, result.replicates);
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          const int b = next.fetch_add(1);
          if (b >= B) return;
          ok[static_cast<std::size_t>(b)] = run_replicate(
              data, spec, original, seed, b, rows_of, result.replicates);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (char o : ok) {
    if (!o) ++result.n_failed;
  }

  if (result.n_failed > B / 2) {
    throw TooManyFailures(std::to_string(result.n_failed) + " of " +
                          std::to_string(B) + " bootstrap replicates failed");
  }

  const double lo_p = 0.5 * (1.0 - level);
  const double hi_p = 0.5 * (1.0 + level);
  auto interval_of = [&](Eigen::Index col, const std::string& name,
                         double estimate) {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
      const double x = result.replicates(b, col);
      if (std::isfinite(x)) v.push_back(x);
    }
    BootstrapInterval iv;
    iv.parameter = name;
    iv.estimate = estimate;
    if (v.empty()) {
      iv.lower = iv.upper = kNaN;
    } else {
      std::sort(v.begin(), v.end());
      iv.lower = quantile_type7(v, lo_p);
      iv.upper = quantile_type7(v, hi_p);
    }
    return iv;
  };

  for (Eigen::Index j = 0; j < ncov; ++j) {
    result.shared.push_back(interval_of(
        j, data.covariate_names[static_cast<std::size_t>(j)],
        original.shared_beta[j]));
  }
  for (int k = 0; k < m; ++k) {
    result.cluster_intercepts.push_back(interval_of(
        ncov + k, "cluster_" + std::to_string(k + 1),
        original.cluster_intercepts.values[static_cast<std::size_t>(k)]));
  }
  return result;
}

}  // namespace tsc
