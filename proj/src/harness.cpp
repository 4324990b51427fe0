#include "tscluster/harness.hpp"

#include <atomic>
#include <thread>

#include "tscluster/errors.hpp"

namespace tsc {

namespace {

// Full fixed-effects baseline: per-unit dummies plus shared covariates,
// unpenalized. Throws on separation or rank deficiency.
std::pair<std::vector<double>, Eigen::Vector2d> fit_gfm(const Dataset& data,
                                                        Family family) {
  const Eigen::Index nrows = data.n_rows();
  const Eigen::Index ncov = data.n_covariates();
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

  const GlmFit fit = fit_glm(data.y, design, family, 0.0);
  if (!fit.converged) {
    throw Separation("full fixed-effects fit did not converge");
  }
  std::vector<double> intercepts(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) {
    intercepts[static_cast<std::size_t>(u)] = fit.coefficients[ncov + u];
  }
  Eigen::Vector2d beta(fit.coefficients[0], fit.coefficients[1]);
  return {std::move(intercepts), beta};
}

}  // namespace

ReplicationOutcome run_replication(const Scenario& scenario, int replication,
                                   const ModelSpec& spec) {
  const SimulatedData sim =
      simulate(scenario, static_cast<std::uint64_t>(replication));

  ReplicationOutcome out;
  try {
    auto [intercepts, beta] = fit_gfm(sim.dataset, scenario.family);
    ReplicationMetrics m;
    m.method = "GFM";
    m.replication = replication;
    m.mse_intercepts = mse_intercepts(intercepts, sim.true_unit_intercepts);
    m.mse_linear = mse_linear(beta, sim.true_beta);
    m.n_clusters = scenario.n;
    out.metrics.push_back(std::move(m));
  } catch (const Error&) {
    out.gfm_failed = true;
  }

  try {
    const TreeFit fit = fit_tsc(sim.dataset, spec);
    ReplicationMetrics m;
    m.method = "TSC";
    m.replication = replication;
    m.mse_intercepts =
        mse_intercepts(fit.unit_intercepts(), sim.true_unit_intercepts);
    m.mse_linear =
        mse_linear(Eigen::Vector2d(fit.shared_beta[0], fit.shared_beta[1]),
                   sim.true_beta);
    m.n_clusters = fit.n_clusters();
    out.metrics.push_back(std::move(m));
  } catch (const Error&) {
    out.tsc_failed = true;
  }
  return out;
}

CellResult run_cell(const Scenario& scenario, int R, const ModelSpec& spec,
                    int threads) {
  if (R < 1) throw InputError("need at least one replication");
  std::vector<ReplicationOutcome> outcomes(static_cast<std::size_t>(R));

  const int workers = std::max(1, std::min(threads, R));
  if (workers == 1) {
    for (int r = 0; r < R; ++r) {
      outcomes[static_cast<std::size_t>(r)] =
          run_replication(scenario, r, spec);
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          const int r = next.fetch_add(1);
          if (r >= R) return;
          outcomes[static_cast<std::size_t>(r)] =
              run_replication(scenario, r, spec);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  CellResult result;
  for (const auto& o : outcomes) {
    result.gfm_failures += o.gfm_failed ? 1 : 0;
    result.tsc_failures += o.tsc_failed ? 1 : 0;
    for (const auto& m : o.metrics) result.metrics.push_back(m);
  }
  if (!result.metrics.empty()) {
    result.summary = summarize_cell(result.metrics);
  }
  result.summary.r = R;
  return result;
}

}  // namespace tsc
