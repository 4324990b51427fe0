#ifndef TSCLUSTER_HARNESS_HPP
#define TSCLUSTER_HARNESS_HPP

#include <vector>

#include "tscluster/metrics.hpp"
#include "tscluster/simulate.hpp"
#include "tscluster/tree.hpp"

namespace tsc {

// Evaluation of one simulated replication by the two in-scope methods:
// the full fixed-effects model (GFM) and tree-structured clustering (TSC).
struct ReplicationOutcome {
  std::vector<ReplicationMetrics> metrics;  // successful methods only
  bool gfm_failed = false;
  bool tsc_failed = false;
};

ReplicationOutcome run_replication(const Scenario& scenario, int replication,
                                   const ModelSpec& spec);

struct CellResult {
  std::vector<ReplicationMetrics> metrics;  // ordered by (replication, method)
  CellSummary summary;
  int gfm_failures = 0;
  int tsc_failures = 0;
};

// R replications of a cell. Replications are independent deterministic
// streams, so running them on `threads` workers and reducing by replication
// index reproduces the serial result bit for bit.
CellResult run_cell(const Scenario& scenario, int R, const ModelSpec& spec,
                    int threads = 1);

}  // namespace tsc

#endif  // TSCLUSTER_HARNESS_HPP
