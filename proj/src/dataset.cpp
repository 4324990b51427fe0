#include "tscluster/dataset.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "tscluster/errors.hpp"

namespace tsc {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& field, std::size_t line_no,
                    const std::string& column) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (*(last - 1) == ' ' || *(last - 1) == '\r' ||
                          *(last - 1) == '\t'))
    --last;
  double value = 0.0;
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw InputError("line " + std::to_string(line_no) + ": column '" +
                     column + "' has non-numeric value '" + field + "'");
  }
  return value;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<int> Dataset::unit_sizes() const {
  std::vector<int> sizes(unit_names.size(), 0);
  for (int u : unit_of_row) sizes[static_cast<std::size_t>(u)]++;
  return sizes;
}

void Dataset::validate() const {
  const auto n = static_cast<int>(unit_names.size());
  if (static_cast<Eigen::Index>(unit_of_row.size()) != y.size() ||
      covariates.rows() != y.size()) {
    throw DimensionMismatch("dataset row counts disagree");
  }
  if (static_cast<Eigen::Index>(covariate_names.size()) != covariates.cols()) {
    throw DimensionMismatch("covariate name count mismatch");
  }
  for (int u : unit_of_row) {
    if (u < 0 || u >= n) throw DimensionMismatch("unit index out of range");
  }
  const auto sizes = unit_sizes();
  for (std::size_t u = 0; u < sizes.size(); ++u) {
    if (sizes[u] == 0) {
      throw EmptyUnit("unit '" + unit_names[u] + "' has no rows");
    }
  }
}

Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty input");
  auto header = split_line(line);
  for (auto& h : header) h = trim(h);
  if (header.size() < 2 || header[0] != "unit" || header[1] != "y") {
    throw InputError("line 1: header must start with 'unit,y'");
  }

  Dataset data;
  data.covariate_names.assign(header.begin() + 2, header.end());
  const std::size_t ncov = data.covariate_names.size();

  std::map<std::string, int> unit_index;
  std::vector<double> ys;
  std::vector<std::vector<double>> xs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != header.size()) {
      throw InputError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    const std::string unit = trim(fields[0]);
    if (unit.empty()) {
      throw InputError("line " + std::to_string(line_no) + ": empty unit id");
    }
    auto it = unit_index.find(unit);
    int idx;
    if (it == unit_index.end()) {
      idx = static_cast<int>(data.unit_names.size());
      unit_index.emplace(unit, idx);
      data.unit_names.push_back(unit);
    } else {
      idx = it->second;
    }
    data.unit_of_row.push_back(idx);
    ys.push_back(parse_number(fields[1], line_no, "y"));
    std::vector<double> row(ncov);
    for (std::size_t j = 0; j < ncov; ++j) {
      row[j] = parse_number(fields[2 + j], line_no, data.covariate_names[j]);
    }
    xs.push_back(std::move(row));
  }
  if (ys.empty()) throw InputError("no data rows");

  const auto nrows = static_cast<Eigen::Index>(ys.size());
  data.y.resize(nrows);
  data.covariates.resize(nrows, static_cast<Eigen::Index>(ncov));
  for (Eigen::Index i = 0; i < nrows; ++i) {
    data.y[i] = ys[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < ncov; ++j) {
      data.covariates(i, static_cast<Eigen::Index>(j)) =
          xs[static_cast<std::size_t>(i)][j];
    }
  }
  data.validate();
  return data;
}

Dataset read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_csv(in);
}

void write_csv(const Dataset& data, std::ostream& out) {
  out << "unit,y";
  for (const auto& name : data.covariate_names) out << ',' << name;
  out << '\n';
  out.precision(17);
  for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
    out << data.unit_names[static_cast<std::size_t>(data.unit_of_row
            [static_cast<std::size_t>(i)])]
        << ',' << data.y[i];
    for (Eigen::Index j = 0; j < data.covariates.cols(); ++j) {
      out << ',' << data.covariates(i, j);
    }
    out << '\n';
  }
}

std::optional<std::size_t> first_non_binary_row(const Dataset& data) {
  for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
    if (data.y[i] != 0.0 && data.y[i] != 1.0) {
      return static_cast<std::size_t>(i) + 2;  // header is line 1
    }
  }
  return std::nullopt;
}

}  // namespace tsc
