#include "tscluster/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>

#include "tscluster/errors.hpp"

namespace tsc {

Scenario Scenario::paper_cell(Family family, InterceptDist dist, int n,
                              int n_i, int m0, double rho,
                              std::uint64_t seed) {
  Scenario s;
  s.family = family;
  s.intercept_dist = dist;
  s.n = n;
  s.n_i = n_i;
  s.m0 = m0;
  s.rho = rho;
  s.seed = seed;
  if (family.is_gaussian()) {
    s.mu_b = 0.0;
    s.sigma_b = 1.0;
    s.df = 0.5;
    s.sigma_eps = 3.0;
    s.beta1 = s.beta2 = 2.0;
  } else {
    s.mu_b = -0.8;
    s.sigma_b = 2.0;
    s.df = 2.0;
    s.sigma_eps = 0.0;
    s.beta1 = s.beta2 = 0.1;
  }
  return s;
}

std::string Scenario::to_config() const {
  std::ostringstream out;
  out.precision(17);
  out << "family=" << family.name() << '\n'
      << "n=" << n << '\n'
      << "n_i=" << n_i << '\n'
      << "m0=" << m0 << '\n'
      << "rho=" << rho << '\n'
      << "intercept_dist="
      << (intercept_dist == InterceptDist::Normal ? "normal" : "chisq") << '\n'
      << "df=" << df << '\n'
      << "mu_b=" << mu_b << '\n'
      << "sigma_b2=" << sigma_b * sigma_b << '\n'
      << "sigma_eps=" << sigma_eps << '\n'
      << "beta1=" << beta1 << '\n'
      << "beta2=" << beta2 << '\n'
      << "seed=" << seed << '\n';
  return out.str();
}

Scenario Scenario::from_config(const std::string& text) {
  Scenario s;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("scenario config line missing '=': " + line);
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "family") {
      if (value == "gaussian") {
        s.family = Family::gaussian();
      } else if (value == "binomial") {
        s.family = Family::binomial();
      } else {
        throw InputError("unknown family '" + value + "'");
      }
    } else if (key == "n") {
      s.n = std::stoi(value);
    } else if (key == "n_i") {
      s.n_i = std::stoi(value);
    } else if (key == "m0") {
      s.m0 = std::stoi(value);
    } else if (key == "rho") {
      s.rho = std::stod(value);
    } else if (key == "intercept_dist") {
      if (value == "normal") {
        s.intercept_dist = InterceptDist::Normal;
      } else if (value == "chisq") {
        s.intercept_dist = InterceptDist::ChiSquared;
      } else {
        throw InputError("unknown intercept_dist '" + value + "'");
      }
    } else if (key == "df") {
      s.df = std::stod(value);
    } else if (key == "mu_b") {
      s.mu_b = std::stod(value);
    } else if (key == "sigma_b2") {
      s.sigma_b = std::sqrt(std::stod(value));
    } else if (key == "sigma_eps") {
      s.sigma_eps = std::stod(value);
    } else if (key == "beta1") {
      s.beta1 = std::stod(value);
    } else if (key == "beta2") {
      s.beta2 = std::stod(value);
    } else if (key == "seed") {
      s.seed = std::stoull(value);
    } else {
      throw InputError("unknown scenario key '" + key + "'");
    }
  }
  return s;
}

namespace {

std::vector<double> draw_raw_intercepts(int n, const Scenario& scenario,
                                        Rng& rng) {
  std::vector<double> raw(static_cast<std::size_t>(n));
  for (auto& v : raw) {
    if (scenario.intercept_dist == InterceptDist::Normal) {
      v = scenario.mu_b + scenario.sigma_b * rng.normal();
    } else {
      // Shift the chi-squared draw so its distribution mean equals mu_b.
      v = rng.chisq(scenario.df) - scenario.df + scenario.mu_b;
    }
  }
  return raw;
}

std::pair<std::vector<double>, std::vector<int>> fuse_intercepts(
    const std::vector<double>& raw, int m0) {
  const int n = static_cast<int>(raw.size());
  std::vector<int> by_rank(static_cast<std::size_t>(n));
  std::iota(by_rank.begin(), by_rank.end(), 0);
  std::stable_sort(by_rank.begin(), by_rank.end(), [&raw](int a, int b) {
    return raw[static_cast<std::size_t>(a)] < raw[static_cast<std::size_t>(b)];
  });

  // Balanced contiguous groups of the sorted draws; the first n % m0 groups
  // take the extra unit.
  std::vector<double> fused(static_cast<std::size_t>(n));
  std::vector<int> cluster(static_cast<std::size_t>(n));
  const int base = n / m0;
  const int extra = n % m0;
  int start = 0;
  for (int k = 0; k < m0; ++k) {
    const int size = base + (k < extra ? 1 : 0);
    double mean = 0.0;
    for (int i = start; i < start + size; ++i) {
      mean += raw[static_cast<std::size_t>(by_rank[static_cast<std::size_t>(i)])];
    }
    mean /= static_cast<double>(size);
    for (int i = start; i < start + size; ++i) {
      const auto u = static_cast<std::size_t>(by_rank[static_cast<std::size_t>(i)]);
      fused[u] = mean;
      cluster[u] = k;
    }
    start += size;
  }
  return {std::move(fused), std::move(cluster)};
}

}  // namespace

std::pair<std::vector<double>, std::vector<int>> gen_intercepts(
    int n, int m0, const Scenario& scenario, Rng& rng) {
  if (m0 < 1 || m0 > n) {
    throw InvalidM0("m0 = " + std::to_string(m0) + " with n = " +
                    std::to_string(n));
  }
  return fuse_intercepts(draw_raw_intercepts(n, scenario, rng), m0);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> gen_covariates(
    const std::vector<double>& intercepts, int n, int n_i, double rho,
    Rng& rng) {
  if (!(rho > -1.0 && rho < 1.0)) {
    throw DomainError("rho must lie in (-1,1)");
  }
  const Eigen::Index nrows = static_cast<Eigen::Index>(n) * n_i;
  Eigen::VectorXd x1(nrows), x2(nrows);
  for (Eigen::Index i = 0; i < nrows; ++i) x1[i] = rng.normal();
  for (Eigen::Index i = 0; i < nrows; ++i) x2[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;

  if (rho != 0.0) {
    double mean = 0.0;
    for (double b : intercepts) mean += b;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double b : intercepts) ss += (b - mean) * (b - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) {
      throw ZeroVariance("cannot correlate x1 with constant intercepts");
    }
    const double mix = std::sqrt(1.0 - rho * rho);
    for (Eigen::Index i = 0; i < nrows; ++i) {
      const int unit = static_cast<int>(i / n_i);
      const double z = (intercepts[static_cast<std::size_t>(unit)] - mean) / sd;
      x1[i] = rho * z + mix * x1[i];
    }
  }
  return {std::move(x1), std::move(x2)};
}

Eigen::VectorXd gen_response(const std::vector<double>& intercepts,
                             const Eigen::VectorXd& x1,
                             const Eigen::VectorXd& x2,
                             const Eigen::Vector2d& beta, Family family,
                             double sigma_eps, int n_i, Rng& rng) {
  const Eigen::Index nrows = x1.size();
  Eigen::VectorXd y(nrows);
  for (Eigen::Index i = 0; i < nrows; ++i) {
    const int unit = static_cast<int>(i / n_i);
    const double eta = intercepts[static_cast<std::size_t>(unit)] +
                       beta[0] * x1[i] + beta[1] * x2[i];
    if (family.is_gaussian()) {
      y[i] = eta + sigma_eps * rng.normal();
    } else {
      const double pi = 1.0 / (1.0 + std::exp(-eta));
      y[i] = rng.bernoulli(pi) ? 1.0 : 0.0;
    }
  }
  return y;
}

double effective_df(int n, int n_i, double sigma_eps2, double sigma_b2) {
  if (n < 1 || n_i < 1 || sigma_eps2 <= 0.0 || sigma_b2 <= 0.0) {
    throw DomainError("effective_df needs positive arguments");
  }
  return static_cast<double>(n - 1) * n_i /
         (n_i + sigma_eps2 / sigma_b2);
}

SimulatedData simulate(const Scenario& scenario, std::uint64_t replication) {
  if (scenario.m0 < 1 || scenario.m0 > scenario.n) {
    throw InvalidM0("m0 = " + std::to_string(scenario.m0) + " with n = " +
                    std::to_string(scenario.n));
  }
  Rng rng = Rng::stream(scenario.seed, replication);

  SimulatedData sim;
  // Draw order is fixed: intercepts, x1, x2, response noise.
  const std::vector<double> raw =
      draw_raw_intercepts(scenario.n, scenario, rng);
  auto [fused, cluster] = fuse_intercepts(raw, scenario.m0);

  auto moments = [](const std::vector<double>& v) {
    double s = 0.0, ss = 0.0;
    for (double x : v) {
      s += x;
      ss += x * x;
    }
    const double mean = s / static_cast<double>(v.size());
    return std::pair<double, double>(mean,
                                     ss / static_cast<double>(v.size()) -
                                         mean * mean);
  };
  std::tie(sim.raw_mean, sim.raw_var) = moments(raw);
  std::tie(sim.fused_mean, sim.fused_var) = moments(fused);

  auto [x1, x2] =
      gen_covariates(fused, scenario.n, scenario.n_i, scenario.rho, rng);
  const Eigen::Vector2d beta(scenario.beta1, scenario.beta2);
  Eigen::VectorXd y = gen_response(fused, x1, x2, beta, scenario.family,
                                   scenario.sigma_eps, scenario.n_i, rng);

  Dataset& data = sim.dataset;
  const Eigen::Index nrows = y.size();
  data.unit_names.reserve(static_cast<std::size_t>(scenario.n));
  for (int u = 0; u < scenario.n; ++u) {
    data.unit_names.push_back("u" + std::to_string(u + 1));
  }
  data.unit_of_row.resize(static_cast<std::size_t>(nrows));
  for (Eigen::Index i = 0; i < nrows; ++i) {
    data.unit_of_row[static_cast<std::size_t>(i)] =
        static_cast<int>(i / scenario.n_i);
  }
  data.y = std::move(y);
  data.covariates.resize(nrows, 2);
  data.covariates.col(0) = x1;
  data.covariates.col(1) = x2;
  data.covariate_names = {"x1", "x2"};

  sim.true_unit_intercepts = std::move(fused);
  sim.true_partition = std::move(cluster);
  sim.true_beta = beta;
  return sim;
}

}  // namespace tsc
