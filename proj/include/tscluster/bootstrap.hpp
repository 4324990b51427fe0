#ifndef TSCLUSTER_BOOTSTRAP_HPP
#define TSCLUSTER_BOOTSTRAP_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tscluster/dataset.hpp"
#include "tscluster/tree.hpp"

namespace tsc {

struct BootstrapInterval {
  std::string parameter;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct BootstrapResult {
  std::vector<BootstrapInterval> shared;
  std::vector<BootstrapInterval> cluster_intercepts;
  // One row per replicate (failed rows are NaN); shared coefficients first,
  // then the original fit's cluster intercepts. A cluster absent from a
  // replicate leaves NaN in its column without failing the replicate.
  Eigen::MatrixXd replicates;
  int n_failed = 0;
  int b_requested = 0;

  int used() const { return b_requested - n_failed; }
};

// Nonparametric percentile bootstrap: resamples n units with replacement
// (each drawn unit contributes all its observations under a fresh id),
// refits the tree on every replicate for the shared coefficients, and refits
// the original partition's cluster-dummy GLM for the cluster intercepts.
// Intervals are type-7 empirical quantiles at (1-level)/2 and (1+level)/2.
// Replicate b draws from the stream (seed, b), so running on any number of
// threads reproduces the serial result bit for bit. Throws TooManyFailures
// when more than half the replicates fail.
BootstrapResult bootstrap_ci(const Dataset& data, const ModelSpec& spec,
                             int B, double level, std::uint64_t seed,
                             int threads = 1);

}  // namespace tsc

#endif  // TSCLUSTER_BOOTSTRAP_HPP
