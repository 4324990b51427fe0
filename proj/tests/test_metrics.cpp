#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "test_util.hpp"
#include "tscluster/errors.hpp"
#include "tscluster/harness.hpp"
#include "tscluster/metrics.hpp"

using namespace tsc;

TEST_CASE("mse_intercepts") {
  CHECK(mse_intercepts({1.0, 2.0}, {1.0, 2.0}) == 0.0);
  CHECK(mse_intercepts({1.0, -1.0}, {0.0, 0.0}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(mse_intercepts({1.0}, {1.0, 2.0}), LengthMismatch);

  SUBCASE("invariant under simultaneous permutation") {
    const std::vector<double> est{0.3, -1.2, 2.2, 0.0};
    const std::vector<double> truth{0.1, -1.0, 2.0, 0.4};
    const double base = mse_intercepts(est, truth);
    const std::vector<int> perm{2, 0, 3, 1};
    std::vector<double> est_p(4), truth_p(4);
    for (int i = 0; i < 4; ++i) {
      est_p[static_cast<std::size_t>(i)] =
          est[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
      truth_p[static_cast<std::size_t>(i)] =
          truth[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    }
    CHECK(mse_intercepts(est_p, truth_p) == doctest::Approx(base));
  }
}

TEST_CASE("mse_linear") {
  CHECK(mse_linear({2.0, 2.0}, {2.0, 2.0}) == 0.0);
  CHECK(mse_linear({2.1, 2.3}, {2.0, 2.0}) == doctest::Approx(0.05));
}

TEST_CASE("summarize_cell") {
  SUBCASE("single replication summary equals itself") {
    ReplicationMetrics m;
    m.method = "TSC";
    m.mse_intercepts = 0.4;
    m.mse_linear = 0.03;
    m.n_clusters = 5;
    const CellSummary s = summarize_cell({m});
    REQUIRE(s.methods.size() == 1);
    CHECK(s.methods[0].mse_intercepts == 0.4);
    CHECK(s.methods[0].mse_linear == 0.03);
    CHECK(s.methods[0].n_clusters == 5.0);
    CHECK(s.methods[0].r_used == 1);
  }
  SUBCASE("two replications average") {
    ReplicationMetrics a, b;
    a.method = b.method = "GFM";
    a.mse_intercepts = 0.4;
    b.mse_intercepts = 0.6;
    a.n_clusters = b.n_clusters = 4;
    const CellSummary s = summarize_cell({a, b});
    CHECK(s.methods[0].mse_intercepts == doctest::Approx(0.5));
  }
  SUBCASE("means stay inside per-replication extremes") {
    Rng rng(15);
    std::vector<ReplicationMetrics> reps;
    double lo = 1e9, hi = -1e9;
    for (int r = 0; r < 25; ++r) {
      ReplicationMetrics m;
      m.method = "TSC";
      m.mse_intercepts = std::abs(rng.normal());
      lo = std::min(lo, m.mse_intercepts);
      hi = std::max(hi, m.mse_intercepts);
      m.n_clusters = 1 + static_cast<int>(rng.uniform_int(6));
      reps.push_back(m);
    }
    const CellSummary s = summarize_cell(reps);
    CHECK(s.methods[0].mse_intercepts >= lo);
    CHECK(s.methods[0].mse_intercepts <= hi);
    CHECK(s.methods[0].p10_intercepts <= s.methods[0].p90_intercepts);
  }
  SUBCASE("empty input throws") {
    CHECK_THROWS_AS(summarize_cell({}), LengthMismatch);
  }
}

TEST_CASE("harness GFM intercepts equal the profiled per-unit refit") {
  // With shared coefficients fixed at the joint estimates, the per-unit
  // intercept is the mean of that unit's partial residuals; the joint dummy
  // fit reproduces it exactly.
  const Scenario scenario = Scenario::paper_cell(
      Family::gaussian(), InterceptDist::Normal, 12, 8, 3, 0.0, 515);
  const SimulatedData sim = simulate(scenario, 0);

  const Eigen::Index nrows = sim.dataset.n_rows();
  const int n = sim.dataset.n_units();
  Eigen::MatrixXd X(nrows, 2 + n);
  X.setZero();
  X.col(0) = sim.dataset.covariates.col(0);
  X.col(1) = sim.dataset.covariates.col(1);
  for (Eigen::Index i = 0; i < nrows; ++i) {
    X(i, 2 + sim.dataset.unit_of_row[static_cast<std::size_t>(i)]) = 1.0;
  }
  const Eigen::VectorXd joint = oracles::least_squares(X, sim.dataset.y);

  std::vector<double> refit(static_cast<std::size_t>(n), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < nrows; ++i) {
    const auto u = static_cast<std::size_t>(
        sim.dataset.unit_of_row[static_cast<std::size_t>(i)]);
    refit[u] += sim.dataset.y[i] - joint[0] * X(i, 0) - joint[1] * X(i, 1);
    counts[u] += 1;
  }
  std::vector<double> joint_ints(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) {
    refit[static_cast<std::size_t>(u)] /= counts[static_cast<std::size_t>(u)];
    joint_ints[static_cast<std::size_t>(u)] = joint[2 + u];
  }
  const double a = mse_intercepts(joint_ints, sim.true_unit_intercepts);
  const double b = mse_intercepts(refit, sim.true_unit_intercepts);
  CHECK(a == doctest::Approx(b).epsilon(1e-10));

  // And the harness reports the same number for GFM.
  ModelSpec spec;
  const auto outcome = run_replication(scenario, 0, spec);
  bool found = false;
  for (const auto& m : outcome.metrics) {
    if (m.method == "GFM") {
      found = true;
      CHECK(m.mse_intercepts == doctest::Approx(a).epsilon(1e-10));
    }
  }
  CHECK(found);
}

TEST_CASE("selected cluster count at n=20, n_i=40 matches the reference") {
  const Scenario cell = Scenario::paper_cell(
      Family::gaussian(), InterceptDist::Normal, 20, 40, 5, 0.0, 20401);
  ModelSpec spec;
  const CellResult res = run_cell(cell, 100, spec, 4);
  double nc = 0.0;
  for (const auto& ms : res.summary.methods) {
    if (ms.method == "TSC") nc = ms.n_clusters;
  }
  CHECK(nc == doctest::Approx(5.76).epsilon(1.0 / 5.76));
}

TEST_CASE("run_cell is thread-invariant") {
  const Scenario scenario = Scenario::paper_cell(
      Family::gaussian(), InterceptDist::Normal, 10, 8, 3, 0.0, 99);
  ModelSpec spec;
  const CellResult serial = run_cell(scenario, 8, spec, 1);
  const CellResult parallel = run_cell(scenario, 8, spec, 4);
  REQUIRE(serial.metrics.size() == parallel.metrics.size());
  for (std::size_t i = 0; i < serial.metrics.size(); ++i) {
    CHECK(serial.metrics[i].method == parallel.metrics[i].method);
    CHECK(serial.metrics[i].replication == parallel.metrics[i].replication);
    CHECK(serial.metrics[i].mse_intercepts ==
          parallel.metrics[i].mse_intercepts);
    CHECK(serial.metrics[i].mse_linear == parallel.metrics[i].mse_linear);
    CHECK(serial.metrics[i].n_clusters == parallel.metrics[i].n_clusters);
  }
}
