#pragma once

#include <optional>
#include <span>
#include <vector>

#include "decisens/core.hpp"
#include "decisens/sample_model.hpp"

namespace decisens {

enum class TiltDirection { sup, inf };

// Exponentially tilted weights w_i ∝ exp(±lambda * L_i) over the m atoms,
// with the realized KL to the uniform base, the tilted expected loss and the
// effective sample size.
struct TiltedWeights {
  double lambda = 0.0;
  WeightVector weights;
  double kl = 0.0;
  double psi = 0.0;
  double ess = 0.0;
  TiltDirection direction = TiltDirection::sup;
  bool saturated = false;   // requested radius beyond the finite-atom maximum
  bool degenerate = false;  // constant losses; weights stay uniform
};

// KL(w || uniform) = sum w_i log(m w_i).
inline double kl_to_uniform(const WeightVector& w) {
  const double m = static_cast<double>(w.size());
  double acc = 0.0;
  for (double v : w.w)
    if (v > 0.0) acc += v * std::log(m * v);
  return std::max(acc, 0.0);
}

inline TiltedWeights tilt_weights(std::span<const double> losses, double lambda,
                                  TiltDirection dir) {
  if (losses.size() < 2) throw input_error("tilt_weights: need m >= 2");
  if (!(lambda >= 0.0)) throw input_error("tilt_weights: lambda must be >= 0");
  for (double v : losses)
    if (!std::isfinite(v)) throw input_error("tilt_weights: non-finite loss");
  const std::size_t m = losses.size();
  const double sign = dir == TiltDirection::sup ? 1.0 : -1.0;

  TiltedWeights out;
  out.lambda = lambda;
  out.direction = dir;
  std::vector<double> log_w(m);
  for (std::size_t i = 0; i < m; ++i) log_w[i] = sign * lambda * losses[i];
  const double mx = *std::max_element(log_w.begin(), log_w.end());
  out.weights.w.resize(m);
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    out.weights.w[i] = std::exp(log_w[i] - mx);
    sum += out.weights.w[i];
  }
  for (double& v : out.weights.w) v /= sum;
  out.psi = expected_loss(out.weights, losses);
  out.kl = kl_to_uniform(out.weights);
  out.ess = effective_sample_size(out.weights);
  return out;
}

namespace detail {

// Atoms attaining the extremal loss for the given direction, with the
// finite-atom KL ceiling log(m / #extremal).
struct SaturationInfo {
  std::vector<std::size_t> extremal;
  double kl_max = 0.0;
};

inline SaturationInfo saturation_info(std::span<const double> losses,
                                      TiltDirection dir) {
  const double target = dir == TiltDirection::sup
                            ? *std::max_element(losses.begin(), losses.end())
                            : *std::min_element(losses.begin(), losses.end());
  SaturationInfo info;
  for (std::size_t i = 0; i < losses.size(); ++i)
    if (std::abs(losses[i] - target) <= 1e-12) info.extremal.push_back(i);
  info.kl_max = std::log(static_cast<double>(losses.size()) /
                         static_cast<double>(info.extremal.size()));
  return info;
}

inline TiltedWeights point_mass_tilt(std::span<const double> losses,
                                     TiltDirection dir,
                                     const SaturationInfo& info) {
  TiltedWeights out;
  out.direction = dir;
  out.lambda = kInf;
  out.weights.w.assign(losses.size(), 0.0);
  const double p = 1.0 / static_cast<double>(info.extremal.size());
  for (std::size_t i : info.extremal) out.weights.w[i] = p;
  out.psi = expected_loss(out.weights, losses);
  out.kl = info.kl_max;
  out.ess = effective_sample_size(out.weights);
  out.saturated = true;
  return out;
}

inline bool c_tolerance_met(double kl, double c) {
  return c >= 1e-8 ? std::abs(kl - c) <= 1e-8 * c : std::abs(kl - c) <= 1e-12;
}

}  // namespace detail

// Invert the lambda <-> C map: find the tilt whose realized KL equals C.
// Doubling bracket then bisection; radii beyond the finite-atom ceiling
// log(m / #argmax) return the point mass on the extremal atoms, flagged.
inline TiltedWeights solve_lambda_for_C(std::span<const double> losses, double c,
                                        TiltDirection dir) {
  if (!(c >= 0.0)) throw input_error("solve_lambda_for_C: C must be >= 0");
  if (losses.size() < 2) throw input_error("solve_lambda_for_C: need m >= 2");
  const double lo_v = *std::min_element(losses.begin(), losses.end());
  const double hi_v = *std::max_element(losses.begin(), losses.end());
  if (hi_v - lo_v <= 0.0) {
    TiltedWeights out = tilt_weights(losses, 0.0, dir);
    out.degenerate = true;
    out.saturated = c > 0.0;
    return out;
  }
  if (c == 0.0) return tilt_weights(losses, 0.0, dir);

  const auto info = detail::saturation_info(losses, dir);
  if (c >= info.kl_max * (1.0 - 1e-12))
    return detail::point_mass_tilt(losses, dir, info);

  double lam_lo = 0.0;
  double lam_hi = 1.0;
  TiltedWeights at_hi = tilt_weights(losses, lam_hi, dir);
  while (at_hi.kl < c) {
    lam_lo = lam_hi;
    lam_hi *= 2.0;
    if (lam_hi > 1e300) return detail::point_mass_tilt(losses, dir, info);
    at_hi = tilt_weights(losses, lam_hi, dir);
  }
  if (detail::c_tolerance_met(at_hi.kl, c)) return at_hi;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lam_lo + lam_hi);
    TiltedWeights t = tilt_weights(losses, mid, dir);
    if (detail::c_tolerance_met(t.kl, c)) return t;
    if (t.kl < c)
      lam_lo = mid;
    else
      lam_hi = mid;
  }
  // Bisection exhausted; the plateau is numerically flat below C.
  TiltedWeights t = tilt_weights(losses, lam_hi, dir);
  t.saturated = !detail::c_tolerance_met(t.kl, c);
  return t;
}

// Variance of the losses under uniform weights: the lambda-derivative of the
// tilted expected loss at lambda = 0.
inline double local_sensitivity(std::span<const double> losses) {
  if (losses.empty()) throw input_error("local_sensitivity: empty losses");
  return variance(losses);
}

// Tilt of the regret column L_a - L_{a'}; psi is the worst-case expected
// regret at radius C.
inline TiltedWeights regret_tilt(const NormalizedLossMatrix& lm, std::size_t a,
                                 std::size_t a_prime, double c) {
  if (a == a_prime) throw input_error("regret_tilt: a and a' must differ");
  if (a >= lm.num_actions() || a_prime >= lm.num_actions())
    throw input_error("regret_tilt: action index out of range");
  const std::size_t m = lm.num_samples();
  std::vector<double> regret(m);
  for (std::size_t i = 0; i < m; ++i)
    regret[i] = lm.values.at(i, a) - lm.values.at(i, a_prime);
  return solve_lambda_for_C(regret, c, TiltDirection::sup);
}

// Expected-loss envelopes over KL balls, per action and radius.
struct EnvelopeCurve {
  std::vector<double> c_grid;
  std::vector<std::vector<double>> psi_sup;     // [action][radius]
  std::vector<std::vector<double>> psi_inf;
  std::vector<std::vector<double>> lambda_sup;
  std::vector<std::vector<double>> lambda_inf;
  std::vector<std::vector<double>> ess_sup;
  std::vector<std::vector<char>> saturated;     // sup-direction flag
  std::vector<double> baseline;                 // expected losses at C = 0
  std::size_t bayes_action = 0;
  std::optional<double> crossing_c;  // first grid C where a rival's inf
                                     // undercuts the Bayes action's sup
};

inline EnvelopeCurve envelope_curve(const NormalizedLossMatrix& lm,
                                    std::span<const double> c_grid) {
  if (c_grid.empty()) throw input_error("envelope_curve: empty C grid");
  for (std::size_t i = 1; i < c_grid.size(); ++i)
    if (c_grid[i] <= c_grid[i - 1])
      throw input_error("envelope_curve: C grid not strictly increasing");
  if (c_grid.front() < 0.0) throw input_error("envelope_curve: negative C");

  const std::size_t k = lm.num_actions();
  EnvelopeCurve env;
  env.c_grid.assign(c_grid.begin(), c_grid.end());
  env.psi_sup.resize(k);
  env.psi_inf.resize(k);
  env.lambda_sup.resize(k);
  env.lambda_inf.resize(k);
  env.ess_sup.resize(k);
  env.saturated.resize(k);
  env.baseline.resize(k);

  const WeightVector uni = WeightVector::uniform(lm.num_samples());
  for (std::size_t a = 0; a < k; ++a) {
    const auto losses = lm.action_losses(a);
    env.baseline[a] = expected_loss(uni, losses);
    for (double c : c_grid) {
      const TiltedWeights sup = solve_lambda_for_C(losses, c, TiltDirection::sup);
      const TiltedWeights inf = solve_lambda_for_C(losses, c, TiltDirection::inf);
      env.psi_sup[a].push_back(sup.psi);
      env.psi_inf[a].push_back(inf.psi);
      env.lambda_sup[a].push_back(sup.lambda);
      env.lambda_inf[a].push_back(inf.lambda);
      env.ess_sup[a].push_back(sup.ess);
      env.saturated[a].push_back(sup.saturated ? 1 : 0);
    }
  }
  for (std::size_t a = 1; a < k; ++a)
    if (env.baseline[a] < env.baseline[env.bayes_action]) env.bayes_action = a;
  if (k >= 2) {
    for (std::size_t ci = 0; ci < env.c_grid.size(); ++ci) {
      for (std::size_t a = 0; a < k; ++a) {
        if (a == env.bayes_action) continue;
        if (env.psi_inf[a][ci] < env.psi_sup[env.bayes_action][ci]) {
          env.crossing_c = env.c_grid[ci];
          break;
        }
      }
      if (env.crossing_c) break;
    }
  }
  return env;
}

namespace detail {

// Worst-case expected regret as a function of lambda for one rival; root in
// lambda of psi(lambda) = 0, reported as the matching KL radius.
inline double c_star_vs_rival(std::span<const double> regret) {
  const double base = mean(regret);
  if (base >= -1e-12) return 0.0;
  const double top = *std::max_element(regret.begin(), regret.end());
  if (top <= 0.0) return kInf;

  double lam_lo = 0.0;
  double lam_hi = 1.0;
  TiltedWeights t = tilt_weights(regret, lam_hi, TiltDirection::sup);
  while (t.psi < 0.0) {
    lam_lo = lam_hi;
    lam_hi *= 2.0;
    if (lam_hi > 1e12) return t.kl;  // psi -> top > 0; radius numerically capped
    t = tilt_weights(regret, lam_hi, TiltDirection::sup);
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lam_lo + lam_hi);
    t = tilt_weights(regret, mid, TiltDirection::sup);
    if (std::abs(t.psi) <= 1e-8) break;
    if (t.psi < 0.0)
      lam_lo = mid;
    else
      lam_hi = mid;
  }
  return t.kl;
}

}  // namespace detail

// Definition of local admissibility: the largest radius C at which action a's
// worst-case regret against every rival stays strictly negative.  0 when some
// baseline regret is already >= 0, +infinity when a dominates pointwise.
inline double c_star(const NormalizedLossMatrix& lm, std::size_t a) {
  if (lm.num_actions() < 2) throw input_error("c_star: need k >= 2 actions");
  if (a >= lm.num_actions()) throw input_error("c_star: action index out of range");
  const std::size_t m = lm.num_samples();
  double best = kInf;
  for (std::size_t r = 0; r < lm.num_actions(); ++r) {
    if (r == a) continue;
    std::vector<double> regret(m);
    for (std::size_t i = 0; i < m; ++i)
      regret[i] = lm.values.at(i, a) - lm.values.at(i, r);
    best = std::min(best, detail::c_star_vs_rival(regret));
    if (best == 0.0) return 0.0;
  }
  return best;
}

// Weight-degeneracy summaries along a C grid, plus the smallest radius at
// which 99% of the mass sits on the top 1% of atoms.
struct CalibrationReport {
  std::vector<double> c_grid;
  std::vector<double> weight_variance;
  std::vector<double> top_mass;
  std::vector<double> ess;
  std::size_t top_count = 0;      // ceil(0.01 * m)
  double top_fraction = 0.0;      // top_count / m (noted when m < 100)
  std::optional<double> c_max;
};

inline CalibrationReport calibration_report(std::span<const double> losses,
                                            std::span<const double> c_grid) {
  if (c_grid.empty()) throw input_error("calibration_report: empty C grid");
  const std::size_t m = losses.size();
  CalibrationReport rep;
  rep.c_grid.assign(c_grid.begin(), c_grid.end());
  rep.top_count = static_cast<std::size_t>(
      std::ceil(0.01 * static_cast<double>(m)));
  rep.top_count = std::max<std::size_t>(rep.top_count, 1);
  rep.top_fraction = static_cast<double>(rep.top_count) / static_cast<double>(m);
  for (double c : c_grid) {
    const TiltedWeights t = solve_lambda_for_C(losses, c, TiltDirection::sup);
    std::vector<double> w = t.weights.w;
    rep.weight_variance.push_back(variance(w));
    std::sort(w.begin(), w.end(), std::greater<>());
    double top = 0.0;
    for (std::size_t i = 0; i < rep.top_count; ++i) top += w[i];
    rep.top_mass.push_back(top);
    rep.ess.push_back(t.ess);
    if (!rep.c_max && top >= 0.99) rep.c_max = c;
  }
  return rep;
}

}  // namespace decisens
