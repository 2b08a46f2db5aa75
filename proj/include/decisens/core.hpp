#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace decisens {

// Thrown on any malformed input (dimensions, domains, file contents).
class input_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> out(rows);
    for (std::size_t i = 0; i < rows; ++i) out[i] = at(i, j);
    return out;
  }

  bool all_finite() const {
    return std::all_of(data.begin(), data.end(),
                       [](double x) { return std::isfinite(x); });
  }
};

inline double mean(std::span<const double> x) {
  if (x.empty()) throw input_error("mean of empty vector");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Population variance (divide by n).
inline double variance(std::span<const double> x) {
  const double mu = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - mu) * (v - mu);
  return acc / static_cast<double>(x.size());
}

inline double log_sum_exp(std::span<const double> x) {
  if (x.empty()) throw input_error("log_sum_exp of empty vector");
  const double mx = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double v : x) s += std::exp(v - mx);
  return mx + std::log(s);
}

// Stable ordering of sample indices by value, original index breaks ties.
inline std::vector<std::size_t> sort_indices(std::span<const double> x,
                                             bool descending) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return descending ? x[a] > x[b] : x[a] < x[b];
  });
  return idx;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace decisens
