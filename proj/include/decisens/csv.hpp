#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "decisens/core.hpp"
#include "decisens/sample_model.hpp"

namespace decisens {

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;  // data rows only
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      std::string cell(line.substr(start, i - start));
      // trim surrounding whitespace
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      out.push_back(b == std::string::npos ? std::string{}
                                           : cell.substr(b, e - b + 1));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace detail

// Parse a numeric CSV with a single header row; errors name the offending
// row and column (1-based, header is row 1).
inline CsvTable parse_csv(std::istream& in, const std::string& name) {
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (lineno == 1) {
      table.header = cells;
      for (std::size_t i = 0; i < cells.size(); ++i)
        for (std::size_t j = i + 1; j < cells.size(); ++j)
          if (cells[i] == cells[j])
            throw input_error(name + ": duplicate header column '" + cells[i] + "'");
      continue;
    }
    if (cells.size() != table.header.size())
      throw input_error(name + ": row " + std::to_string(lineno) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(table.header.size()));
    std::vector<double> row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const std::string& c = cells[j];
      double v = 0.0;
      const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      if (res.ec != std::errc{} || res.ptr != c.data() + c.size())
        throw input_error(name + ": non-numeric cell '" + c + "' at row " +
                          std::to_string(lineno) + ", column " +
                          std::to_string(j + 1));
      row[j] = v;
    }
    rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw input_error(name + ": empty file");
  table.values = Matrix(rows.size(), table.header.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < table.header.size(); ++j)
      table.values.at(i, j) = rows[i][j];
  return table;
}

inline CsvTable parse_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open file: " + path);
  return parse_csv(in, path);
}

// Samples file: d parameter columns, with log_density / log_prior /
// loglik_1..loglik_n recognized by header name.
inline SampleBag parse_samples_csv(const std::string& path) {
  const CsvTable t = parse_csv_file(path);
  SampleBag bag;
  std::vector<std::size_t> param_cols;
  std::size_t density_col = t.header.size();
  std::size_t prior_col = t.header.size();
  std::vector<std::size_t> loglik_cols;
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    const std::string& h = t.header[j];
    if (h == "log_density")
      density_col = j;
    else if (h == "log_prior")
      prior_col = j;
    else if (h.rfind("loglik_", 0) == 0)
      loglik_cols.push_back(j);
    else
      param_cols.push_back(j);
  }
  if (param_cols.empty())
    throw input_error(path + ": no parameter columns found");
  const std::size_t m = t.values.rows;
  bag.samples = Matrix(m, param_cols.size());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < param_cols.size(); ++j)
      bag.samples.at(i, j) = t.values.at(i, param_cols[j]);
  if (density_col < t.header.size())
    bag.log_density = t.values.column(density_col);
  if (prior_col < t.header.size()) bag.log_prior = t.values.column(prior_col);
  if (!loglik_cols.empty()) {
    Matrix ll(m, loglik_cols.size());
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < loglik_cols.size(); ++j)
        ll.at(i, j) = t.values.at(i, loglik_cols[j]);
    bag.log_lik_terms = std::move(ll);
  }
  bag.validate();
  return bag;
}

// Loss file: header row of action labels, one numeric column per action.
inline std::pair<Matrix, std::vector<std::string>> parse_losses_csv(
    const std::string& path) {
  const CsvTable t = parse_csv_file(path);
  if (t.values.rows < 2)
    throw input_error(path + ": need at least 2 loss rows");
  return {t.values, t.header};
}

// All numeric output carries 17 significant digits so values round-trip.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw input_error("cannot open output file: " + path);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace decisens
