#ifndef TSCLUSTER_SIMULATE_HPP
#define TSCLUSTER_SIMULATE_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tscluster/dataset.hpp"
#include "tscluster/glm.hpp"
#include "tscluster/rng.hpp"

namespace tsc {

enum class InterceptDist { Normal, ChiSquared };

// One Monte-Carlo cell: clustered intercepts fused from sorted draws, two
// shared covariates (x1 standard normal, optionally correlated with the
// intercepts; x2 Bernoulli(0.5)), Gaussian or binary response.
struct Scenario {
  Family family = Family::gaussian();
  int n = 40;
  int n_i = 20;
  int m0 = 5;
  double rho = 0.0;
  InterceptDist intercept_dist = InterceptDist::Normal;
  double df = 0.5;        // chi-squared draws, centered to mu_b
  double mu_b = 0.0;      // intercept mean
  double sigma_b = 1.0;   // normal intercept sd
  double sigma_eps = 3.0; // Gaussian residual sd
  double beta1 = 2.0;
  double beta2 = 2.0;
  std::uint64_t seed = 0;

  // Cell with the response-family defaults: Gaussian uses N(0,1) or
  // chi-squared(0.5) intercepts, beta = (2,2), sigma_eps = 3; binary uses
  // N(-0.8, 2^2) or chi-squared(2) centered to -0.8, beta = (0.1, 0.1).
  static Scenario paper_cell(Family family, InterceptDist dist, int n,
                             int n_i, int m0, double rho, std::uint64_t seed);

  // Flat key=value serialization (keys: family, n, n_i, m0, rho,
  // intercept_dist, df, mu_b, sigma_b2, sigma_eps, beta1, beta2, seed).
  std::string to_config() const;
  static Scenario from_config(const std::string& text);
};

struct SimulatedData {
  Dataset dataset;
  std::vector<double> true_unit_intercepts;
  std::vector<int> true_partition;  // unit -> 0-based cluster
  Eigen::Vector2d true_beta;
  // Pre- and post-fusion intercept moments, reported side by side since
  // fusion shrinks the raw variance.
  double raw_mean = 0.0;
  double raw_var = 0.0;
  double fused_mean = 0.0;
  double fused_var = 0.0;
};

// Draws n raw intercepts, sorts them, splits into m0 balanced contiguous
// groups and replaces each draw by its group mean. Chi-squared draws are
// shifted so the distribution mean equals mu_b.
std::pair<std::vector<double>, std::vector<int>> gen_intercepts(
    int n, int m0, const Scenario& scenario, Rng& rng);

// x1 ~ N(0,1) re-mixed to rho * z_unit + sqrt(1-rho^2) * x1 where z is the
// unit's intercept standardized by the empirical mean/sd of the fused
// intercepts; x2 ~ Bernoulli(0.5). Throws ZeroVariance when rho != 0 and all
// intercepts coincide.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gen_covariates(
    const std::vector<double>& intercepts, int n, int n_i, double rho,
    Rng& rng);

Eigen::VectorXd gen_response(const std::vector<double>& intercepts,
                             const Eigen::VectorXd& x1,
                             const Eigen::VectorXd& x2,
                             const Eigen::Vector2d& beta, Family family,
                             double sigma_eps, int n_i, Rng& rng);

// Effective degrees of freedom of a random-intercept model:
// (n-1) * n_i / (n_i + sigma_eps2 / sigma_b2).
double effective_df(int n, int n_i, double sigma_eps2, double sigma_b2);

// One replication of a scenario; the RNG stream is keyed by
// (scenario.seed, replication), so replications are order-independent.
SimulatedData simulate(const Scenario& scenario, std::uint64_t replication);

}  // namespace tsc

#endif  // TSCLUSTER_SIMULATE_HPP
