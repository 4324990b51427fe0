// Command-line front end: fit tree-structured clusterings on CSV data, run
// simulation cells, and compute bootstrap confidence intervals.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tscluster/bootstrap.hpp"
#include "tscluster/dataset.hpp"
#include "tscluster/harness.hpp"
#include "tscluster/simulate.hpp"
#include "tscluster/tree.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitFullModel = 3;
constexpr int kExitSimFailures = 4;
constexpr int kExitBootFailures = 5;

struct CommonFlags {
  std::string family = "gaussian";
  double alpha = 0.05;
  int max_splits = -1;  // -1 = unlimited
  double ridge = tsc::kDefaultRidge;
  std::string out_dir;
};

tsc::ModelSpec make_spec(const CommonFlags& flags) {
  tsc::ModelSpec spec;
  spec.family = flags.family == "binomial" ? tsc::Family::binomial()
                                           : tsc::Family::gaussian();
  spec.alpha = flags.alpha;
  if (flags.max_splits >= 0) spec.max_splits = flags.max_splits;
  spec.ridge_fallback = flags.ridge;
  return spec;
}

// Flat key=value config: each key names a long option of the subcommand;
// values fill in only where the command line left the option untouched.
void apply_flat_config(CLI::App* cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tsc::InputError("cannot open config '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw tsc::InputError("config line " + std::to_string(line_no) +
                            ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw tsc::InputError("config line " + std::to_string(line_no) +
                            ": unknown key '" + key + "'");
    }
    if (opt->count() == 0) {
      opt->add_result(value);
      opt->run_callback();
    }
  }
}

void require_set(const std::string& value, const char* flag) {
  if (value.empty()) {
    throw tsc::InputError(std::string(flag) +
                          " is required (flag or config file)");
  }
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  const fs::path path = fs::path(dir) / name;
  std::ofstream out(path);
  if (!out) throw tsc::InputError("cannot write '" + path.string() + "'");
  out.precision(12);
  return out;
}

tsc::Dataset load_input(const std::string& path, const tsc::ModelSpec& spec) {
  tsc::Dataset data = tsc::read_csv_file(path);
  if (spec.family.is_binomial()) {
    if (auto row = tsc::first_non_binary_row(data)) {
      throw tsc::InputError("line " + std::to_string(*row) +
                            ": binomial response must be 0 or 1");
    }
  }
  return data;
}

void write_fit_outputs(const tsc::Dataset& data, const tsc::TreeFit& fit,
                       const std::string& out_dir) {
  {
    auto out = open_output(out_dir, "summary.csv");
    out << "key,value\n";
    out << "family," << fit.spec.family.name() << '\n';
    out << "alpha," << fit.spec.alpha << '\n';
    out << "n_units," << data.n_units() << '\n';
    out << "n_clusters," << fit.n_clusters() << '\n';
    out << "log_likelihood," << fit.final_log_likelihood << '\n';
    out << "ordering_basis,"
        << (fit.order.basis == tsc::OrderBasis::RidgeML ? "ridge" : "ml")
        << '\n';
    out << "stabilized," << (fit.stabilized ? 1 : 0) << '\n';
    for (Eigen::Index j = 0; j < fit.shared_beta.size(); ++j) {
      out << "beta[" << data.covariate_names[static_cast<std::size_t>(j)]
          << "]," << fit.shared_beta[j] << '\n';
    }
    for (std::size_t k = 0; k < fit.cluster_intercepts.values.size(); ++k) {
      out << "cluster_" << k + 1 << ',' << fit.cluster_intercepts.values[k]
          << '\n';
    }
    for (const auto& rec : fit.records) {
      out << "step_" << rec.step << "_global_p," << rec.global_p << '\n';
      out << "step_" << rec.step << "_accepted," << (rec.accepted ? 1 : 0)
          << '\n';
      if (rec.accepted) {
        out << "step_" << rec.step << "_threshold," << rec.chosen_threshold
            << '\n';
      }
    }
  }
  {
    auto out = open_output(out_dir, "partition.csv");
    out << "unit,cluster\n";
    for (int u = 0; u < data.n_units(); ++u) {
      out << data.unit_names[static_cast<std::size_t>(u)] << ','
          << fit.partition.cluster_of[static_cast<std::size_t>(u)] + 1 << '\n';
    }
  }
  {
    auto out = open_output(out_dir, "path.csv");
    out << "step,unit,intercept\n";
    const auto table = tsc::path_table(fit);
    for (std::size_t s = 0; s < table.size(); ++s) {
      for (int u = 0; u < data.n_units(); ++u) {
        out << s << ',' << data.unit_names[static_cast<std::size_t>(u)] << ','
            << table[s][static_cast<std::size_t>(u)] << '\n';
      }
    }
  }
}

int cmd_fit(const std::string& input, const CommonFlags& flags) {
  const tsc::ModelSpec spec = make_spec(flags);
  const tsc::Dataset data = load_input(input, spec);
  const tsc::TreeFit fit = tsc::fit_tsc(data, spec);
  write_fit_outputs(data, fit, flags.out_dir);
  std::cout << "fit: " << data.n_units() << " units -> " << fit.n_clusters()
            << " clusters (outputs in " << flags.out_dir << ")\n";
  return kExitOk;
}

tsc::Scenario parse_cell(const std::string& cell, const std::string& family,
                         std::uint64_t seed) {
  std::vector<std::string> parts;
  std::stringstream ss(cell);
  std::string tok;
  while (std::getline(ss, tok, ',')) parts.push_back(tok);
  if (parts.size() != 5) {
    throw tsc::InputError("--cell expects n,n_i,m0,rho,dist");
  }
  tsc::InterceptDist dist;
  if (parts[4] == "normal") {
    dist = tsc::InterceptDist::Normal;
  } else if (parts[4] == "chisq") {
    dist = tsc::InterceptDist::ChiSquared;
  } else {
    throw tsc::InputError("cell dist must be 'normal' or 'chisq'");
  }
  const tsc::Family fam = family == "binomial" ? tsc::Family::binomial()
                                               : tsc::Family::gaussian();
  try {
    return tsc::Scenario::paper_cell(fam, dist, std::stoi(parts[0]),
                                     std::stoi(parts[1]), std::stoi(parts[2]),
                                     std::stod(parts[3]), seed);
  } catch (const std::exception&) {
    throw tsc::InputError("malformed --cell '" + cell + "'");
  }
}

int cmd_simulate(const std::string& cell, const CommonFlags& flags, int reps,
                 std::uint64_t seed, int threads, bool force_cell) {
  const tsc::Scenario scenario = parse_cell(cell, flags.family, seed);
  // Binary responses with very few measurements per unit are routinely
  // inestimable; such cells are refused unless forced.
  if (scenario.family.is_binomial() && scenario.n_i <= 4 && !force_cell) {
    throw tsc::InputError(
        "binomial cells with n_i <= 4 are excluded by default; pass "
        "--force-cell to run them anyway");
  }
  const tsc::ModelSpec spec = make_spec(flags);
  const tsc::CellResult result =
      tsc::run_cell(scenario, reps, spec, threads);

  if (2 * result.tsc_failures > reps) {
    std::cerr << "error: " << result.tsc_failures << " of " << reps
              << " replications failed\n";
    return kExitSimFailures;
  }

  {
    auto out = open_output(flags.out_dir, "scenario.cfg");
    out << scenario.to_config();
  }
  {
    auto out = open_output(flags.out_dir, "raw_metrics.csv");
    out << "replication,method,mse_intercepts,mse_linear,n_clusters\n";
    for (const auto& m : result.metrics) {
      out << m.replication << ',' << m.method << ',' << m.mse_intercepts
          << ',' << m.mse_linear << ',' << m.n_clusters << '\n';
    }
  }
  {
    auto out = open_output(flags.out_dir, "cell_table.csv");
    out << "method,n,n_i,m0,rho,mse_intercepts,mse_linear,n_clusters,"
           "r_used,n_failed\n";
    for (const auto& ms : result.summary.methods) {
      const int failed =
          ms.method == "GFM" ? result.gfm_failures : result.tsc_failures;
      out << ms.method << ',' << scenario.n << ',' << scenario.n_i << ','
          << scenario.m0 << ',' << scenario.rho << ',' << ms.mse_intercepts
          << ',' << ms.mse_linear << ',' << ms.n_clusters << ',' << ms.r_used
          << ',' << failed << '\n';
    }
  }
  std::cout << "simulate: " << reps << " replications of n=" << scenario.n
            << " n_i=" << scenario.n_i << " m0=" << scenario.m0
            << " (outputs in " << flags.out_dir << ")\n";
  return kExitOk;
}

int cmd_bootstrap(const std::string& input, const CommonFlags& flags, int B,
                  double level, std::uint64_t seed, int threads) {
  const tsc::ModelSpec spec = make_spec(flags);
  const tsc::Dataset data = load_input(input, spec);
  const tsc::BootstrapResult result =
      tsc::bootstrap_ci(data, spec, B, level, seed, threads);

  auto out = open_output(flags.out_dir, "intervals.csv");
  out << "parameter,estimate,lower,upper\n";
  for (const auto& iv : result.shared) {
    out << iv.parameter << ',' << iv.estimate << ',' << iv.lower << ','
        << iv.upper << '\n';
  }
  for (const auto& iv : result.cluster_intercepts) {
    out << iv.parameter << ',' << iv.estimate << ',' << iv.lower << ','
        << iv.upper << '\n';
  }
  std::cout << "bootstrap: " << result.used() << " of " << B
            << " replicates used (outputs in " << flags.out_dir << ")\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-structured clustering of unit intercepts in fixed-effects GLMs"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string input;
  std::string cell;
  int reps = 100;
  int bootstrap_b = 200;
  double level = 0.95;
  std::uint64_t seed = 1;
  int threads = 1;
  bool force_cell = false;
  std::string config_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--family", flags.family, "Response family")
        ->check(CLI::IsMember({"gaussian", "binomial"}))
        ->capture_default_str();
    cmd->add_option("--alpha", flags.alpha, "Significance level")
        ->check(CLI::Range(1e-12, 1.0 - 1e-12))
        ->capture_default_str();
    cmd->add_option("--max-splits", flags.max_splits,
                    "Split budget (-1 = unlimited)")
        ->capture_default_str();
    cmd->add_option("--ridge", flags.ridge,
                    "Ridge stabilizer for inestimable fits")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--out", flags.out_dir, "Output directory");
    cmd->add_option("--config", config_path,
                    "Flat key=value config file; flags take precedence");
  };

  CLI::App* fit = app.add_subcommand("fit", "Fit a clustering on CSV data");
  fit->add_option("--input", input, "CSV file (unit,y,<covariates...>)");
  add_common(fit);

  CLI::App* simulate =
      app.add_subcommand("simulate", "Run one simulation cell");
  simulate->add_option("--cell", cell, "n,n_i,m0,rho,dist");
  simulate->add_option("--reps", reps, "Replications")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--seed", seed, "RNG seed")->capture_default_str();
  simulate->add_option("--threads", threads, "Replication workers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_flag("--force-cell", force_cell,
                     "Run cells excluded by default");
  add_common(simulate);

  CLI::App* bootstrap =
      app.add_subcommand("bootstrap", "Bootstrap confidence intervals");
  bootstrap->add_option("--input", input, "CSV file");
  bootstrap->add_option("--bootstrap", bootstrap_b, "Replicates B")
      ->capture_default_str();
  bootstrap->add_option("--level", level, "Interval level")
      ->check(CLI::Range(1e-12, 1.0 - 1e-12))
      ->capture_default_str();
  bootstrap->add_option("--seed", seed, "RNG seed")->capture_default_str();
  bootstrap->add_option("--threads", threads, "Replicate workers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_common(bootstrap);

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) {
      if (!config_path.empty()) apply_flat_config(fit, config_path);
      require_set(input, "--input");
      require_set(flags.out_dir, "--out");
      return cmd_fit(input, flags);
    }
    if (simulate->parsed()) {
      if (!config_path.empty()) apply_flat_config(simulate, config_path);
      require_set(cell, "--cell");
      require_set(flags.out_dir, "--out");
      return cmd_simulate(cell, flags, reps, seed, threads, force_cell);
    }
    if (bootstrap->parsed()) {
      if (!config_path.empty()) apply_flat_config(bootstrap, config_path);
      require_set(input, "--input");
      require_set(flags.out_dir, "--out");
      if (bootstrap_b < 2) {
        throw tsc::InputError("--bootstrap must be at least 2");
      }
      return cmd_bootstrap(input, flags, bootstrap_b, level, seed, threads);
    }
  } catch (const tsc::TooManyFailures& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBootFailures;
  } catch (const tsc::FullModelUnfit& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFullModel;
  } catch (const tsc::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const tsc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
