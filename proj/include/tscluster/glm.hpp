#ifndef TSCLUSTER_GLM_HPP
#define TSCLUSTER_GLM_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "tscluster/errors.hpp"

namespace tsc {

enum class FamilyKind { GaussianIdentity, BinomialLogit };

struct Family {
  FamilyKind kind = FamilyKind::GaussianIdentity;

  static Family gaussian() { return Family{FamilyKind::GaussianIdentity}; }
  static Family binomial() { return Family{FamilyKind::BinomialLogit}; }

  bool is_gaussian() const { return kind == FamilyKind::GaussianIdentity; }
  bool is_binomial() const { return kind == FamilyKind::BinomialLogit; }
  const char* name() const {
    return is_gaussian() ? "gaussian" : "binomial";
  }
};

enum class ColumnRole { SharedCovariate, GlobalIntercept, ThresholdIndicator, UnitDummy };

// Dense design with a semantic tag per column. Threshold-indicator columns
// remember which threshold they encode (ordering position), -1 elsewhere.
struct DesignMatrix {
  Eigen::MatrixXd X;
  std::vector<ColumnRole> roles;
  std::vector<int> thresholds;

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }

  // At most one global-intercept column; indicator columns are 0/1.
  void validate() const;
};

struct GlmFit {
  Eigen::VectorXd coefficients;
  // Unpenalized log-likelihood at `coefficients`. Gaussian fits score with
  // their own ML variance estimate.
  double log_likelihood = 0.0;
  // Gaussian: residual sum of squares. Binomial: -2 * log_likelihood.
  double deviance = 0.0;
  bool converged = false;
  int iterations = 0;
  double sigma2_hat = 0.0;  // Gaussian only
};

struct GlmOptions {
  double tol = 1e-10;    // relative deviance change
  int max_iter = 100;
  double coef_cap = 30.0;  // separation guard for unpenalized logit
};

// Mean floor for binomial probabilities.
inline constexpr double kMeanClamp = 1e-10;

// Ridge applied to every column except the global intercept.
inline constexpr double kDefaultRidge = 1e-4;

// ML (or ridge-penalized ML) fit by iteratively reweighted least squares.
// Gaussian-identity solves in one weighted step; binomial-logit iterates
// until the relative deviance change drops below tol. Linear solves use a
// rank-revealing QR of the penalized normal equations.
GlmFit fit_glm(const Eigen::VectorXd& y, const DesignMatrix& design,
               Family family, double ridge = 0.0, const GlmOptions& opts = {});

// Log-likelihood of responses given fitted means. Binomial means are clamped
// into [kMeanClamp, 1 - kMeanClamp] first; sigma2 is the Gaussian variance.
double log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                      Family family, double sigma2 = 1.0);

// Upper tail P(chi^2_df > x) via the regularized incomplete gamma function.
double chisq_sf(double x, int df);

struct LrResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Likelihood-ratio test of a nested fit against its supermodel. Statistics
// within noise_tol below zero clamp to zero; anything more negative throws
// ConvergenceSuspect.
LrResult lr_test(const GlmFit& null_fit, const GlmFit& alt_fit, int df,
                 double noise_tol = 1e-6);

}  // namespace tsc

#endif  // TSCLUSTER_GLM_HPP
