#ifndef TSCLUSTER_DATASET_HPP
#define TSCLUSTER_DATASET_HPP

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tsc {

// Long-format clustered observations: every row belongs to one measurement
// unit, units carry arbitrary string ids, and all covariate columns are
// shared-effect covariates.
struct Dataset {
  std::vector<std::string> unit_names;    // size n, order of first appearance
  std::vector<int> unit_of_row;           // size N, values in [0, n)
  Eigen::VectorXd y;                      // size N
  Eigen::MatrixXd covariates;             // N x p, p may be zero
  std::vector<std::string> covariate_names;

  int n_units() const { return static_cast<int>(unit_names.size()); }
  Eigen::Index n_rows() const { return y.size(); }
  Eigen::Index n_covariates() const { return covariates.cols(); }

  std::vector<int> unit_sizes() const;

  // Internal consistency (sizes, unit indices in range, no empty unit).
  void validate() const;
};

// Reads `unit,y,<covariates...>` with a mandatory header. Throws InputError
// naming the offending 1-based file line on malformed input.
Dataset read_csv(std::istream& in);
Dataset read_csv_file(const std::string& path);

void write_csv(const Dataset& data, std::ostream& out);

// First 1-based file line (header = line 1) whose response is not 0 or 1,
// or nullopt if the response is binary throughout.
std::optional<std::size_t> first_non_binary_row(const Dataset& data);

}  // namespace tsc

#endif  // TSCLUSTER_DATASET_HPP
