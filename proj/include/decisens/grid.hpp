#pragma once

#include <charconv>
#include <string>
#include <vector>

#include "decisens/core.hpp"

namespace decisens {

inline std::vector<double> linear_grid(double start, double stop, std::size_t n) {
  if (n < 1) throw input_error("grid: count must be >= 1");
  if (n == 1) return {start};
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = start + (stop - start) * static_cast<double>(i) /
                         static_cast<double>(n - 1);
  out.back() = stop;
  return out;
}

inline std::vector<double> log_grid(double start, double stop, std::size_t n) {
  if (!(start > 0.0 && stop > 0.0))
    throw input_error("grid: log spacing needs positive endpoints");
  auto g = linear_grid(std::log(start), std::log(stop), n);
  for (double& v : g) v = std::exp(v);
  if (!g.empty()) {
    g.front() = start;
    g.back() = stop;
  }
  return g;
}

// Grid spec strings: "start:stop:count:linear" or "start:stop:count:log".
inline std::vector<double> parse_grid_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= spec.size(); ++i) {
    if (i == spec.size() || spec[i] == ':') {
      parts.push_back(spec.substr(begin, i - begin));
      begin = i + 1;
    }
  }
  if (parts.size() != 4)
    throw input_error("grid spec must be start:stop:count:linear|log, got '" +
                      spec + "'");
  const auto num = [&](const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
      throw input_error("grid spec: bad number '" + s + "'");
    return v;
  };
  const double start = num(parts[0]);
  const double stop = num(parts[1]);
  const double cnt = num(parts[2]);
  if (cnt < 1.0 || cnt != std::floor(cnt))
    throw input_error("grid spec: count must be a positive integer");
  if (stop <= start && cnt > 1.0)
    throw input_error("grid spec: stop must exceed start");
  const auto n = static_cast<std::size_t>(cnt);
  if (parts[3] == "linear") return linear_grid(start, stop, n);
  if (parts[3] == "log") return log_grid(start, stop, n);
  throw input_error("grid spec: spacing must be 'linear' or 'log'");
}

}  // namespace decisens
