#include "tscluster/tree.hpp"

#include <algorithm>
#include <cmath>

#include "tscluster/errors.hpp"

namespace tsc {

namespace {

struct FittedModel {
  DesignMatrix design;
  GlmFit fit;
};

// Fits a threshold model, falling back to the ridge when the unpenalized fit
// throws or stalls. `stabilized` forces the ridge from the start so that all
// models within one tree fit are comparable.
FittedModel fit_model(const Dataset& data, const UnitOrder& order,
                      const std::vector<int>& active,
                      std::optional<int> candidate, const ModelSpec& spec,
                      bool stabilized) {
  FittedModel m;
  m.design = expand_design(data, order, active, candidate);
  if (stabilized) {
    m.fit = fit_glm(data.y, m.design, spec.family, spec.ridge_fallback);
    return m;
  }
  try {
    m.fit = fit_glm(data.y, m.design, spec.family, 0.0);
    if (m.fit.converged) return m;
  } catch (const RankDeficient&) {
  } catch (const Separation&) {
  }
  m.fit = fit_glm(data.y, m.design, spec.family, spec.ridge_fallback);
  return m;
}

std::vector<int> all_thresholds(int n) {
  std::vector<int> all(static_cast<std::size_t>(n - 1));
  for (int c = 1; c < n; ++c) all[static_cast<std::size_t>(c - 1)] = c;
  return all;
}

}  // namespace

std::vector<double> TreeFit::unit_intercepts() const {
  std::vector<double> out(partition.cluster_of.size());
  for (std::size_t u = 0; u < out.size(); ++u) {
    out[u] = cluster_intercepts.values[static_cast<std::size_t>(
        partition.cluster_of[u])];
  }
  return out;
}

TreeFit fit_tsc(const Dataset& data, const ModelSpec& spec) {
  data.validate();
  const int n = data.n_units();
  if (n < 2) throw Error("tree-structured clustering needs at least 2 units");
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) {
    throw DomainError("alpha must lie in (0,1)");
  }
  int cap = n - 1;
  if (spec.max_splits) cap = std::min(cap, std::max(0, *spec.max_splits));

  TreeFit tree;
  tree.spec = spec;
  tree.order = order_units(data, spec.family, data.n_covariates() > 0,
                           spec.ridge_ordering, spec.ridge_fallback);

  // The full fixed-effects model, fit once: it is the alternative of every
  // global heterogeneity test. If it is inestimable unpenalized, the whole
  // fit switches to the ridge so that all deviances are comparable.
  bool stabilized = false;
  GlmFit full_fit;
  {
    const DesignMatrix full_design =
        expand_design(data, tree.order, all_thresholds(n));
    bool need_ridge = false;
    try {
      full_fit = fit_glm(data.y, full_design, spec.family, 0.0);
      need_ridge = !full_fit.converged;
    } catch (const RankDeficient&) {
      need_ridge = true;
    } catch (const Separation&) {
      need_ridge = true;
    }
    if (need_ridge) {
      stabilized = true;
      try {
        full_fit = fit_glm(data.y, full_design, spec.family,
                           spec.ridge_fallback);
      } catch (const Error& e) {
        throw FullModelUnfit(
            std::string("full fixed-effects model failed even with the "
                        "ridge fallback: ") + e.what());
      }
      if (!std::isfinite(full_fit.deviance)) {
        throw FullModelUnfit("full fixed-effects model deviance is not finite");
      }
    }
  }
  tree.stabilized = stabilized;
  const double dev_full = full_fit.deviance;

  std::vector<int> active;
  FittedModel current =
      fit_model(data, tree.order, active, std::nullopt, spec, stabilized);
  tree.path.push_back(
      assemble_unit_intercepts(current.design, current.fit, tree.order));

  while (static_cast<int>(active.size()) < cap) {
    const int step = static_cast<int>(active.size()) + 1;
    const int global_df = n - step;

    // Stopping first: the data are heterogeneous beyond the current
    // clustering only if the full model still improves the deviance by more
    // than chi-squared noise on n - step df.
    const double global_stat =
        std::max(0.0, current.fit.deviance - dev_full);
    const double global_p = chisq_sf(global_stat, global_df);
    if (global_p >= spec.alpha) {
      SplitRecord rec;
      rec.step = step;
      rec.global_stat = global_stat;
      rec.global_df = global_df;
      rec.global_p = global_p;
      rec.accepted = false;
      tree.records.push_back(std::move(rec));
      break;
    }

    std::vector<CandidateStat> stats;
    stats.reserve(static_cast<std::size_t>(n - 1));
    int best_c = 0;
    double best_stat = -1.0;
    for (int c = 1; c < n; ++c) {
      if (std::find(active.begin(), active.end(), c) != active.end()) continue;
      const FittedModel cand =
          fit_model(data, tree.order, active, c, spec, stabilized);
      const double t = std::max(0.0, current.fit.deviance - cand.fit.deviance);
      stats.push_back(CandidateStat{c, t, chisq_sf(t, 1)});
      if (t > best_stat) {  // ties keep the smallest threshold
        best_stat = t;
        best_c = c;
      }
    }

    active.push_back(best_c);
    current = fit_model(data, tree.order, active, std::nullopt, spec,
                        stabilized);

    SplitRecord rec;
    rec.step = step;
    rec.chosen_threshold = best_c;
    rec.candidate_stats = std::move(stats);
    rec.global_stat = global_stat;
    rec.global_df = global_df;
    rec.global_p = global_p;
    rec.accepted = true;
    tree.records.push_back(std::move(rec));
    tree.path.push_back(
        assemble_unit_intercepts(current.design, current.fit, tree.order));
  }

  Finalized fin = finalize(tree.order, active, current.fit, current.design);
  tree.partition = std::move(fin.partition);
  tree.cluster_intercepts = std::move(fin.intercepts);
  tree.shared_beta = std::move(fin.shared);
  tree.final_log_likelihood = current.fit.log_likelihood;
  return tree;
}

std::vector<std::vector<double>> path_table(const TreeFit& fit) {
  std::size_t accepted = 0;
  for (const auto& rec : fit.records) {
    if (rec.accepted) ++accepted;
  }
  if (fit.path.size() != accepted + 1) {
    throw Error("coefficient path is not rectangular with the split count");
  }
  for (const auto& row : fit.path) {
    if (row.size() != fit.partition.cluster_of.size()) {
      throw Error("coefficient path row has wrong width");
    }
  }
  return fit.path;
}

}  // namespace tsc
