#include "tscluster/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tsc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSigma2Floor = 1e-290;

double clamp_prob(double p) {
  return std::min(std::max(p, kMeanClamp), 1.0 - kMeanClamp);
}

double binomial_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double p = clamp_prob(1.0 / (1.0 + std::exp(-eta[i])));
    ll += y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
  }
  return -2.0 * ll;
}

// Penalty weights: every column except the global intercept.
Eigen::VectorXd penalty_mask(const DesignMatrix& design) {
  Eigen::VectorXd d = Eigen::VectorXd::Ones(design.cols());
  for (Eigen::Index j = 0; j < design.cols(); ++j) {
    if (design.roles[static_cast<std::size_t>(j)] == ColumnRole::GlobalIntercept) {
      d[j] = 0.0;
    }
  }
  return d;
}

// Solves (A + ridge*diag(d)) beta = b with a rank-revealing QR; throws
// RankDeficient when unpenalized and numerically singular.
Eigen::VectorXd solve_normal_equations(Eigen::MatrixXd A,
                                       const Eigen::VectorXd& b,
                                       double ridge,
                                       const Eigen::VectorXd& d) {
  const Eigen::Index p = A.cols();
  if (ridge > 0.0) {
    for (Eigen::Index j = 0; j < p; ++j) A(j, j) += ridge * d[j];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (ridge == 0.0 && qr.rank() < p) {
    throw RankDeficient("normal equations are rank deficient (rank " +
                        std::to_string(qr.rank()) + " of " +
                        std::to_string(p) + ")");
  }
  return qr.solve(b);
}

}  // namespace

void DesignMatrix::validate() const {
  if (static_cast<Eigen::Index>(roles.size()) != X.cols() ||
      static_cast<Eigen::Index>(thresholds.size()) != X.cols()) {
    throw DimensionMismatch("design metadata does not match column count");
  }
  int intercepts = 0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const auto role = roles[static_cast<std::size_t>(j)];
    if (role == ColumnRole::GlobalIntercept) ++intercepts;
    if (role == ColumnRole::ThresholdIndicator) {
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double v = X(i, j);
        if (v != 0.0 && v != 1.0) {
          throw DomainError("threshold indicator column contains a value "
                            "other than 0 or 1");
        }
      }
    }
  }
  if (intercepts > 1) {
    throw DomainError("more than one global-intercept column");
  }
}

GlmFit fit_glm(const Eigen::VectorXd& y, const DesignMatrix& design,
               Family family, double ridge, const GlmOptions& opts) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (y.size() != n) {
    throw DimensionMismatch("response length " + std::to_string(y.size()) +
                            " does not match design rows " +
                            std::to_string(n));
  }
  if (p == 0) throw DimensionMismatch("design has no columns");
  if (ridge < 0.0) throw DomainError("ridge must be non-negative");

  const Eigen::MatrixXd& X = design.X;
  const Eigen::VectorXd d = penalty_mask(design);

  GlmFit fit;
  if (family.is_gaussian()) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!std::isfinite(y[i])) throw DomainError("non-finite response");
    }
    const Eigen::MatrixXd A = X.transpose() * X;
    const Eigen::VectorXd b = X.transpose() * y;
    fit.coefficients = solve_normal_equations(A, b, ridge, d);
    const double rss = (y - X * fit.coefficients).squaredNorm();
    fit.deviance = rss;
    fit.sigma2_hat = std::max(rss / static_cast<double>(n), kSigma2Floor);
    fit.log_likelihood = -0.5 * static_cast<double>(n) *
                         (std::log(2.0 * kPi * fit.sigma2_hat) + 1.0);
    fit.converged = true;
    fit.iterations = 1;
    return fit;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) {
      throw DomainError("binomial response must be 0 or 1 (row " +
                        std::to_string(i) + ")");
    }
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
  double dev = binomial_deviance(y, eta);
  bool converged = false;
  int iter = 0;
  while (iter < opts.max_iter) {
    ++iter;
    Eigen::VectorXd w(n), z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double pi = clamp_prob(1.0 / (1.0 + std::exp(-eta[i])));
      const double wi = std::max(pi * (1.0 - pi), kMeanClamp);
      w[i] = wi;
      z[i] = eta[i] + (y[i] - pi) / wi;
    }
    const Eigen::MatrixXd Xw = X.array().colwise() * w.array();
    const Eigen::MatrixXd A = X.transpose() * Xw;
    const Eigen::VectorXd b = Xw.transpose() * z;
    const Eigen::VectorXd beta_old = beta;
    beta = solve_normal_equations(A, b, ridge, d);
    if (ridge == 0.0 && beta.cwiseAbs().maxCoeff() > opts.coef_cap) {
      throw Separation("logistic coefficients exceeded " +
                       std::to_string(opts.coef_cap) +
                       "; the ML estimate is diverging");
    }
    eta = X * beta;
    const double dev_new = binomial_deviance(y, eta);
    // Saturated probabilities freeze the deviance while the coefficients
    // still drift, so convergence also requires a stationary beta.
    const bool dev_settled =
        std::abs(dev - dev_new) < opts.tol * (std::abs(dev_new) + 0.1);
    const bool beta_settled =
        (beta - beta_old).cwiseAbs().maxCoeff() <
        1e-8 * (1.0 + beta.cwiseAbs().maxCoeff());
    dev = dev_new;
    if (dev_settled && beta_settled) {
      converged = true;
      break;
    }
  }
  // A numerically perfect binomial fit is only reachable with infinite
  // coefficients, so the unpenalized ML estimate does not exist.
  if (ridge == 0.0 && dev < 1e-6) {
    throw Separation("deviance numerically zero; responses are separated");
  }

  fit.coefficients = beta;
  fit.deviance = dev;
  fit.log_likelihood = -0.5 * dev;
  fit.converged = converged;
  fit.iterations = iter;
  fit.sigma2_hat = 0.0;
  return fit;
}

double log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                      Family family, double sigma2) {
  if (y.size() != mu.size()) {
    throw DimensionMismatch("response and mean lengths differ");
  }
  if (family.is_gaussian()) {
    if (sigma2 <= 0.0) throw DomainError("sigma2 must be positive");
    double ll = 0.0;
    const double c = -0.5 * std::log(2.0 * kPi * sigma2);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double r = y[i] - mu[i];
      ll += c - 0.5 * r * r / sigma2;
    }
    return ll;
  }
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double p = clamp_prob(mu[i]);
    if (!(p > 0.0 && p < 1.0)) {
      throw DomainError("binomial mean outside (0,1) after clamping");
    }
    ll += y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
  }
  return ll;
}

namespace {

// Regularized lower incomplete gamma P(a,x) by series expansion (x < a+1).
double gamma_p_series(double a, double x) {
  const int max_terms = 2000;
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < max_terms; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a,x) by modified Lentz continued
// fraction (x >= a+1).
double gamma_q_contfrac(double a, double x) {
  const int max_terms = 2000;
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double dd = 1.0 / b;
  double h = dd;
  for (int i = 1; i <= max_terms; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    dd = an * dd + b;
    if (std::abs(dd) < tiny) dd = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    dd = 1.0 / dd;
    const double del = dd * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double chisq_sf(double x, int df) {
  if (df < 1) throw DomainError("chisq_sf needs df >= 1");
  if (!(x > 0.0)) return 1.0;
  if (!std::isfinite(x)) return 0.0;
  const double a = 0.5 * static_cast<double>(df);
  const double xx = 0.5 * x;
  double q;
  if (xx < a + 1.0) {
    q = 1.0 - gamma_p_series(a, xx);
  } else {
    q = gamma_q_contfrac(a, xx);
  }
  return std::min(std::max(q, 0.0), 1.0);
}

LrResult lr_test(const GlmFit& null_fit, const GlmFit& alt_fit, int df,
                 double noise_tol) {
  if (df < 1) throw DomainError("lr_test needs df >= 1");
  double stat = 2.0 * (alt_fit.log_likelihood - null_fit.log_likelihood);
  if (stat < 0.0) {
    if (stat < -noise_tol) {
      throw ConvergenceSuspect(
          "likelihood-ratio statistic " + std::to_string(stat) +
          " is negative beyond tolerance; fits are suspect");
    }
    stat = 0.0;
  }
  return LrResult{stat, chisq_sf(stat, df)};
}

}  // namespace tsc
