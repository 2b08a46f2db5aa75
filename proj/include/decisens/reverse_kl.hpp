#pragma once

#include <span>
#include <vector>

#include "decisens/core.hpp"
#include "decisens/kl_tilt.hpp"
#include "decisens/sample_model.hpp"

namespace decisens {

// Least-favourable weights under the reverse ball KL(pi_I || pi) <= C, solved
// through the KKT stationarity form w_i = mu / (m (nu - L_i)) with a scalar
// search in the dual threshold nu.
struct ReverseSolution {
  WeightVector weights;
  double nu = 0.0;
  double kl_rev = 0.0;
  double psi = 0.0;
  TiltDirection direction = TiltDirection::sup;
  bool degenerate = false;  // constant losses; weights stay uniform
};

// (1/m) sum log(1 / (m w_i)); +infinity if any weight is zero.
inline double reverse_kl(const WeightVector& w) {
  const double m = static_cast<double>(w.size());
  double acc = 0.0;
  for (double v : w.w) {
    if (v <= 0.0) return kInf;
    acc += std::log(1.0 / (m * v));
  }
  return std::max(acc / m, 0.0);
}

namespace detail {

// Weights w_i ∝ 1/(nu - L_i) for nu > max L, normalized.
inline WeightVector reverse_weights_at(std::span<const double> losses, double nu) {
  WeightVector w{std::vector<double>(losses.size())};
  double sum = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    w.w[i] = 1.0 / (nu - losses[i]);
    sum += w.w[i];
  }
  for (double& v : w.w) v /= sum;
  return w;
}

inline bool rev_tolerance_met(double kl, double c) {
  return c >= 1e-8 ? std::abs(kl - c) <= 1e-8 * c : std::abs(kl - c) <= 1e-12;
}

inline ReverseSolution solve_reverse_sup(std::span<const double> losses, double c) {
  const std::size_t m = losses.size();
  const double lo_v = *std::min_element(losses.begin(), losses.end());
  const double hi_v = *std::max_element(losses.begin(), losses.end());

  ReverseSolution out;
  out.direction = TiltDirection::sup;
  if (hi_v - lo_v <= 0.0) {
    out.weights = WeightVector::uniform(m);
    out.nu = kInf;
    out.psi = lo_v;
    out.degenerate = true;
    return out;
  }
  if (c == 0.0) {
    out.weights = WeightVector::uniform(m);
    out.nu = kInf;
    out.psi = expected_loss(out.weights, losses);
    return out;
  }

  // KL_rev is monotone decreasing in nu on (max L, inf): bracket the gap
  // nu - max L by doubling/halving, then bisect.
  const double span = hi_v - lo_v + 1e-12;
  double gap_hi = span;  // candidate with KL possibly below C
  WeightVector w = reverse_weights_at(losses, hi_v + gap_hi);
  double kl = reverse_kl(w);
  if (kl < c) {
    // need smaller nu (more concentration)
    double gap_lo = gap_hi;
    for (int it = 0; it < 2000 && kl < c; ++it) {
      gap_hi = gap_lo;
      gap_lo *= 0.5;
      w = reverse_weights_at(losses, hi_v + gap_lo);
      kl = reverse_kl(w);
    }
    double a = gap_lo, b = gap_hi;  // KL(a) >= C >= KL(b)
    for (int it = 0; it < 400; ++it) {
      const double mid = 0.5 * (a + b);
      w = reverse_weights_at(losses, hi_v + mid);
      kl = reverse_kl(w);
      if (rev_tolerance_met(kl, c)) { a = b = mid; break; }
      if (kl > c) a = mid; else b = mid;
    }
    out.nu = hi_v + 0.5 * (a + b);
  } else {
    double gap_lo = gap_hi;
    for (int it = 0; it < 2000 && kl > c; ++it) {
      gap_lo = gap_hi;
      gap_hi *= 2.0;
      w = reverse_weights_at(losses, hi_v + gap_hi);
      kl = reverse_kl(w);
    }
    double a = gap_lo, b = gap_hi;  // KL(a) >= C >= KL(b)
    for (int it = 0; it < 400; ++it) {
      const double mid = 0.5 * (a + b);
      w = reverse_weights_at(losses, hi_v + mid);
      kl = reverse_kl(w);
      if (rev_tolerance_met(kl, c)) { a = b = mid; break; }
      if (kl > c) a = mid; else b = mid;
    }
    out.nu = hi_v + 0.5 * (a + b);
  }
  out.weights = reverse_weights_at(losses, out.nu);
  out.kl_rev = reverse_kl(out.weights);
  out.psi = expected_loss(out.weights, losses);
  return out;
}

}  // namespace detail

inline ReverseSolution solve_reverse(std::span<const double> losses, double c,
                                     TiltDirection dir) {
  if (!(c >= 0.0)) throw input_error("solve_reverse: C must be >= 0");
  if (losses.size() < 2) throw input_error("solve_reverse: need m >= 2");
  for (double v : losses)
    if (!std::isfinite(v)) throw input_error("solve_reverse: non-finite loss");

  if (dir == TiltDirection::sup) return detail::solve_reverse_sup(losses, c);

  // inf mirrors sup on negated losses; nu lands strictly below min L.
  std::vector<double> neg(losses.size());
  for (std::size_t i = 0; i < losses.size(); ++i) neg[i] = -losses[i];
  ReverseSolution out = detail::solve_reverse_sup(neg, c);
  out.direction = TiltDirection::inf;
  out.nu = -out.nu;
  out.psi = expected_loss(out.weights, losses);
  return out;
}

}  // namespace decisens
