#ifndef TSCLUSTER_TEST_UTIL_HPP
#define TSCLUSTER_TEST_UTIL_HPP

#include <string>
#include <vector>

#include "tscluster/dataset.hpp"
#include "tscluster/glm.hpp"
#include "tscluster/rng.hpp"

namespace testutil {

// Dataset with n_i observations per unit, y = intercept[unit] + noise_sd * z,
// no covariates.
inline tsc::Dataset gaussian_units(const std::vector<double>& intercepts,
                                   int n_i, double noise_sd, tsc::Rng& rng) {
  tsc::Dataset data;
  const int n = static_cast<int>(intercepts.size());
  const Eigen::Index nrows = static_cast<Eigen::Index>(n) * n_i;
  data.y.resize(nrows);
  data.covariates.resize(nrows, 0);
  Eigen::Index r = 0;
  for (int u = 0; u < n; ++u) {
    data.unit_names.push_back("u" + std::to_string(u + 1));
    for (int j = 0; j < n_i; ++j) {
      data.unit_of_row.push_back(u);
      data.y[r++] = intercepts[static_cast<std::size_t>(u)] +
                    noise_sd * rng.normal();
    }
  }
  return data;
}

// Same with two shared covariates x1 ~ N(0,1), x2 ~ Bernoulli(0.5) and
// coefficients beta1, beta2.
inline tsc::Dataset gaussian_units_cov(const std::vector<double>& intercepts,
                                       int n_i, double noise_sd, double beta1,
                                       double beta2, tsc::Rng& rng) {
  tsc::Dataset data = gaussian_units(intercepts, n_i, noise_sd, rng);
  const Eigen::Index nrows = data.n_rows();
  data.covariates.resize(nrows, 2);
  for (Eigen::Index i = 0; i < nrows; ++i) {
    data.covariates(i, 0) = rng.normal();
    data.covariates(i, 1) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    data.y[i] += beta1 * data.covariates(i, 0) + beta2 * data.covariates(i, 1);
  }
  data.covariate_names = {"x1", "x2"};
  return data;
}

inline tsc::Dataset binary_units(const std::vector<double>& intercepts,
                                 int n_i, tsc::Rng& rng) {
  tsc::Dataset data;
  const int n = static_cast<int>(intercepts.size());
  const Eigen::Index nrows = static_cast<Eigen::Index>(n) * n_i;
  data.y.resize(nrows);
  data.covariates.resize(nrows, 0);
  Eigen::Index r = 0;
  for (int u = 0; u < n; ++u) {
    data.unit_names.push_back("u" + std::to_string(u + 1));
    const double pi =
        1.0 / (1.0 + std::exp(-intercepts[static_cast<std::size_t>(u)]));
    for (int j = 0; j < n_i; ++j) {
      data.unit_of_row.push_back(u);
      data.y[r++] = rng.bernoulli(pi) ? 1.0 : 0.0;
    }
  }
  return data;
}

// Element-wise equality that treats two NaNs as equal (failed bootstrap
// replicates are recorded as NaN).
inline bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const bool both_nan = std::isnan(a(i, j)) && std::isnan(b(i, j));
      if (!both_nan && a(i, j) != b(i, j)) return false;
    }
  }
  return true;
}

inline tsc::DesignMatrix plain_design(const Eigen::MatrixXd& X,
                                      int intercept_col = -1) {
  tsc::DesignMatrix d;
  d.X = X;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    d.roles.push_back(j == intercept_col ? tsc::ColumnRole::GlobalIntercept
                                         : tsc::ColumnRole::SharedCovariate);
    d.thresholds.push_back(-1);
  }
  return d;
}

}  // namespace testutil

#endif  // TSCLUSTER_TEST_UTIL_HPP
