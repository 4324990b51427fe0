#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "test_util.hpp"
#include "tscluster/errors.hpp"
#include "tscluster/glm.hpp"
#include "tscluster/rng.hpp"

using namespace tsc;
using testutil::plain_design;

namespace {

Eigen::MatrixXd random_full_rank(Eigen::Index rows, Eigen::Index cols,
                                 Rng& rng) {
  Eigen::MatrixXd X(rows, cols);
  X.col(0).setOnes();
  for (Eigen::Index j = 1; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) X(i, j) = rng.normal();
  }
  return X;
}

}  // namespace

TEST_CASE("intercept-only gaussian fit is the sample mean") {
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  const auto d = plain_design(Eigen::MatrixXd::Ones(3, 1), 0);
  const GlmFit fit = fit_glm(y, d, Family::gaussian());
  CHECK(fit.coefficients[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.sigma2_hat == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(fit.converged);
}

TEST_CASE("penalized logistic fit matches the Newton oracle") {
  Eigen::VectorXd y(4);
  y << 0, 0, 1, 1;
  Eigen::MatrixXd X(4, 2);
  X << 1, 0, 1, 0, 1, 1, 1, 1;
  // Both columns penalized: neither is tagged as the global intercept.
  const auto d = plain_design(X);
  const GlmFit fit = fit_glm(y, d, Family::binomial(), 0.01);
  const Eigen::VectorXd ref =
      oracles::logistic_newton(X, y, 0.01, Eigen::VectorXd::Ones(2));
  CHECK((fit.coefficients - ref).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("gaussian dummies plus covariate match the closed form") {
  Rng rng(501);
  Eigen::MatrixXd X(12, 4);
  X.setZero();
  for (int i = 0; i < 12; ++i) {
    X(i, i / 4) = 1.0;  // three unit dummies
    X(i, 3) = rng.normal();
  }
  Eigen::VectorXd y(12);
  for (int i = 0; i < 12; ++i) y[i] = rng.normal() + 0.5 * X(i, 3) + i / 4;
  const auto d = plain_design(X);
  const GlmFit fit = fit_glm(y, d, Family::gaussian());
  const Eigen::VectorXd ref = oracles::least_squares(X, y);
  CHECK((fit.coefficients - ref).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("gaussian irls equals direct least squares on random problems") {
  Rng rng(88);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index p = 2 + static_cast<Eigen::Index>(rng.uniform_int(8));
    const Eigen::MatrixXd X = random_full_rank(60, p, rng);
    Eigen::VectorXd y(60);
    for (Eigen::Index i = 0; i < 60; ++i) y[i] = rng.normal();
    const GlmFit fit = fit_glm(y, plain_design(X), Family::gaussian());
    const Eigen::VectorXd ref = oracles::least_squares(X, y);
    const double denom = std::max(1.0, ref.norm());
    CHECK((fit.coefficients - ref).norm() / denom < 1e-8);
  }
}

TEST_CASE("adding a column never decreases the log-likelihood") {
  Rng rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::MatrixXd X = random_full_rank(50, 3, rng);
    Eigen::MatrixXd X2(50, 4);
    X2.leftCols(3) = X;
    for (int i = 0; i < 50; ++i) X2(i, 3) = rng.normal();

    Eigen::VectorXd yg(50);
    for (int i = 0; i < 50; ++i) yg[i] = rng.normal() + 0.3 * X(i, 1);
    const double ll_small =
        fit_glm(yg, plain_design(X), Family::gaussian()).log_likelihood;
    const double ll_big =
        fit_glm(yg, plain_design(X2), Family::gaussian()).log_likelihood;
    CHECK(ll_big >= ll_small - 1e-6);

    Eigen::VectorXd yb(50);
    for (int i = 0; i < 50; ++i) {
      const double pi = 1.0 / (1.0 + std::exp(-0.4 * X(i, 1)));
      yb[i] = rng.bernoulli(pi) ? 1.0 : 0.0;
    }
    const double bll_small =
        fit_glm(yb, plain_design(X), Family::binomial()).log_likelihood;
    const double bll_big =
        fit_glm(yb, plain_design(X2), Family::binomial()).log_likelihood;
    CHECK(bll_big >= bll_small - 1e-6);
  }
}

TEST_CASE("binomial score vanishes at the irls solution") {
  Rng rng(33);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::MatrixXd X = random_full_rank(80, 3, rng);
    Eigen::VectorXd y(80);
    for (int i = 0; i < 80; ++i) {
      const double pi =
          1.0 / (1.0 + std::exp(-(0.3 * X(i, 1) - 0.5 * X(i, 2))));
      y[i] = rng.bernoulli(pi) ? 1.0 : 0.0;
    }
    const GlmFit fit = fit_glm(y, plain_design(X), Family::binomial());
    REQUIRE(fit.converged);
    const Eigen::VectorXd grad =
        oracles::binomial_loglik_fd_gradient(X, y, fit.coefficients);
    CHECK(grad.cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("glm error paths") {
  Eigen::VectorXd y(4);
  y << 0, 1, 0, 1;

  SUBCASE("rank deficiency without ridge") {
    Eigen::MatrixXd X(4, 2);
    X << 1, 2, 1, 2, 1, 2, 1, 2;  // duplicate column
    CHECK_THROWS_AS(fit_glm(y, plain_design(X), Family::gaussian()),
                    RankDeficient);
    // With a ridge the same design is solvable.
    CHECK_NOTHROW(fit_glm(y, plain_design(X), Family::gaussian(), 1e-4));
  }

  SUBCASE("separation without ridge") {
    Eigen::VectorXd ys(6);
    ys << 0, 0, 0, 1, 1, 1;
    Eigen::MatrixXd X(6, 2);
    X << 1, -2, 1, -1.5, 1, -1, 1, 1, 1, 1.5, 1, 2;  // perfectly separated
    CHECK_THROWS_AS(fit_glm(ys, plain_design(X), Family::binomial()),
                    Separation);
    CHECK_NOTHROW(fit_glm(ys, plain_design(X), Family::binomial(), 1e-2));
  }

  SUBCASE("dimension mismatch") {
    Eigen::MatrixXd X(3, 1);
    X.setOnes();
    CHECK_THROWS_AS(fit_glm(y, plain_design(X), Family::gaussian()),
                    DimensionMismatch);
  }

  SUBCASE("non-binary response") {
    Eigen::MatrixXd X(4, 1);
    X.setOnes();
    Eigen::VectorXd bad(4);
    bad << 0, 1, 2, 1;
    CHECK_THROWS_AS(fit_glm(bad, plain_design(X), Family::binomial()),
                    DomainError);
  }
}

TEST_CASE("log_likelihood examples") {
  SUBCASE("single bernoulli") {
    Eigen::VectorXd y(1), mu(1);
    y << 0;
    mu << 0.5;
    CHECK(log_likelihood(y, mu, Family::binomial()) ==
          doctest::Approx(std::log(0.5)).epsilon(1e-12));
  }
  SUBCASE("clamping keeps the likelihood finite") {
    Eigen::VectorXd y(2), mu(2);
    y << 1, 1;
    mu << 1.0, 1.0;  // clamped to 1 - 1e-10
    const double ll = log_likelihood(y, mu, Family::binomial());
    CHECK(std::isfinite(ll));
    CHECK(ll == doctest::Approx(2.0 * std::log(1.0 - kMeanClamp)));
  }
  SUBCASE("gaussian hand evaluation") {
    Eigen::VectorXd y(2), mu(2);
    y << 0, 2;
    mu << 1, 1;
    // Sum of two unit-variance normal log-densities at distance one.
    const double expected = -std::log(2.0 * M_PI) - 1.0;
    CHECK(log_likelihood(y, mu, Family::gaussian(), 1.0) ==
          doctest::Approx(expected).epsilon(1e-9));
    CHECK(expected == doctest::Approx(-2.837877).epsilon(1e-6));
  }
}

TEST_CASE("chisq_sf against the quadrature oracle") {
  CHECK(chisq_sf(0.0, 5) == 1.0);
  CHECK(chisq_sf(3.841459, 1) ==
        doctest::Approx(oracles::chisq_sf_quadrature(3.841459, 1))
            .epsilon(1e-8));
  CHECK(chisq_sf(3.841459, 1) == doctest::Approx(0.05).epsilon(2e-3));
  CHECK(chisq_sf(18.307, 10) ==
        doctest::Approx(oracles::chisq_sf_quadrature(18.307, 10))
            .epsilon(1e-8));
  CHECK(chisq_sf(18.307, 10) == doctest::Approx(0.05).epsilon(2e-2));

  SUBCASE("wider grid") {
    for (const int df : {1, 2, 3, 10, 50, 200, 500}) {
      for (const double x : {0.5, 1.0, 5.0, 20.0, 80.0, 200.0}) {
        const double got = chisq_sf(x, df);
        const double ref = oracles::chisq_sf_quadrature(x, df);
        CHECK(std::abs(got - ref) < 1e-10);
      }
    }
  }

  SUBCASE("monotone decreasing in x") {
    for (const int df : {1, 4, 30}) {
      double prev = 1.0;
      for (double x = 0.0; x <= 60.0; x += 0.7) {
        const double q = chisq_sf(x, df);
        CHECK(q <= prev + 1e-15);
        prev = q;
      }
    }
  }

  SUBCASE("extreme tails saturate") {
    CHECK(chisq_sf(1e8, 2) == 0.0);
    CHECK(chisq_sf(-3.0, 2) == 1.0);
  }
}

TEST_CASE("lr_test") {
  GlmFit null_fit, alt_fit;
  null_fit.log_likelihood = -110.0;
  alt_fit.log_likelihood = -105.0;

  SUBCASE("identical fits") {
    const auto r = lr_test(null_fit, null_fit, 3);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
  }
  SUBCASE("statistic ten") {
    const auto r = lr_test(null_fit, alt_fit, 1);
    CHECK(r.statistic == doctest::Approx(10.0));
    CHECK(r.p_value ==
          doctest::Approx(oracles::chisq_sf_quadrature(10.0, 1)).epsilon(1e-8));
    CHECK(r.p_value == doctest::Approx(0.001565).epsilon(1e-3));
  }
  SUBCASE("noise clamps to zero") {
    GlmFit a = null_fit, b = null_fit;
    b.log_likelihood = a.log_likelihood - 5e-13;
    const auto r = lr_test(a, b, 2);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
  }
  SUBCASE("negative beyond tolerance") {
    GlmFit a = null_fit, b = null_fit;
    b.log_likelihood = a.log_likelihood - 1.0;
    CHECK_THROWS_AS(lr_test(a, b, 2), ConvergenceSuspect);
  }
}

TEST_CASE("lr statistic is invariant under covariate rescaling") {
  Rng rng(404);
  Eigen::MatrixXd X = random_full_rank(60, 3, rng);
  Eigen::VectorXd y(60);
  for (int i = 0; i < 60; ++i) y[i] = rng.normal() + 0.4 * X(i, 2);

  Eigen::MatrixXd Xnull = X.leftCols(2);
  const GlmFit fit_null =
      fit_glm(y, plain_design(Xnull), Family::gaussian());
  const GlmFit fit_alt = fit_glm(y, plain_design(X), Family::gaussian());
  const auto r1 = lr_test(fit_null, fit_alt, 1);

  Eigen::MatrixXd Xs = X;
  Xs.col(2) *= 37.5;  // rescaled covariate, refit both models
  const GlmFit fit_alt_s = fit_glm(y, plain_design(Xs), Family::gaussian());
  const auto r2 = lr_test(fit_null, fit_alt_s, 1);
  CHECK(r1.statistic == doctest::Approx(r2.statistic).epsilon(1e-9));
  // The fitted coefficient absorbs the reciprocal scale.
  CHECK(fit_alt.coefficients[2] ==
        doctest::Approx(fit_alt_s.coefficients[2] * 37.5).epsilon(1e-8));
}
