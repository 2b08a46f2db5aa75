#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decisens/core.hpp"
#include "decisens/sample_model.hpp"

namespace decisens {

enum class CurveKind { var, cvar, trimmed, cel };

inline const char* to_string(CurveKind k) {
  switch (k) {
    case CurveKind::var: return "var";
    case CurveKind::cvar: return "cvar";
    case CurveKind::trimmed: return "trimmed";
    case CurveKind::cel: return "cel";
  }
  return "?";
}

// A quantile-indexed curve, the common output shape of the loss diagnostics.
struct QCurve {
  std::vector<double> q;
  std::vector<double> value;
  std::string action_label;
  CurveKind kind = CurveKind::var;
};

namespace detail {

// Piecewise-linear evaluation over increasing nodes, flat beyond the ends.
inline double interp(std::span<const double> xs, std::span<const double> ys,
                     double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + t * (ys[hi] - ys[lo]);
}

inline void check_grid(std::span<const double> grid, const char* who,
                       bool allow_zero = true) {
  if (grid.empty()) throw input_error(std::string(who) + ": empty q grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0 || grid[i] > 1.0)
      throw input_error(std::string(who) + ": q grid outside [0,1]");
    if (!allow_zero && grid[i] == 0.0)
      throw input_error(std::string(who) + ": q grid must exclude q = 0");
    if (i > 0 && grid[i] <= grid[i - 1])
      throw input_error(std::string(who) + ": q grid not strictly increasing");
  }
}

}  // namespace detail

// Quantile loss F^{-1}(1-q).  Nodes at the midpoint plotting positions
// ((k-1/2)/m, k-th largest loss) with flat extension, so q=0 returns the
// maximum loss and q=1 the minimum.
inline QCurve var_curve(std::span<const double> losses,
                        std::span<const double> q_grid,
                        std::string action_label = {}) {
  if (losses.size() < 2) throw input_error("var_curve: need m >= 2");
  detail::check_grid(q_grid, "var_curve");
  const std::size_t m = losses.size();
  const auto order = sort_indices(losses, /*descending=*/true);
  std::vector<double> xs(m), ys(m);
  for (std::size_t k = 0; k < m; ++k) {
    xs[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(m);
    ys[k] = losses[order[k]];
  }
  QCurve out{{}, {}, std::move(action_label), CurveKind::var};
  out.q.assign(q_grid.begin(), q_grid.end());
  out.value.reserve(q_grid.size());
  for (double q : q_grid) out.value.push_back(detail::interp(xs, ys, q));
  return out;
}

// CVaR: mean of the worst q-fraction of losses, linear in k between the
// estimator values G(k/m) = mean of the k largest.  The q -> 0 limit (the
// maximum loss) anchors the left end; an exact q = 0 in the grid is an error.
inline QCurve cvar_curve(std::span<const double> losses,
                         std::span<const double> q_grid,
                         std::string action_label = {}) {
  if (losses.size() < 2) throw input_error("cvar_curve: need m >= 2");
  detail::check_grid(q_grid, "cvar_curve", /*allow_zero=*/false);
  const std::size_t m = losses.size();
  const auto order = sort_indices(losses, /*descending=*/true);
  std::vector<double> xs(m + 1), ys(m + 1);
  xs[0] = 0.0;
  ys[0] = losses[order[0]];
  double partial = 0.0;
  for (std::size_t k = 1; k <= m; ++k) {
    partial += losses[order[k - 1]];
    xs[k] = static_cast<double>(k) / static_cast<double>(m);
    ys[k] = partial / static_cast<double>(k);
  }
  QCurve out{{}, {}, std::move(action_label), CurveKind::cvar};
  out.q.assign(q_grid.begin(), q_grid.end());
  out.value.reserve(q_grid.size());
  for (double q : q_grid) out.value.push_back(detail::interp(xs, ys, q));
  return out;
}

// Symmetric count trimming: drop floor(q*m/2) samples from each tail.
inline double trimmed_mean(std::span<const double> losses, double q) {
  if (losses.empty()) throw input_error("trimmed_mean: empty losses");
  if (!(q >= 0.0 && q < 1.0)) throw input_error("trimmed_mean: q must be in [0,1)");
  const std::size_t m = losses.size();
  const std::size_t drop =
      static_cast<std::size_t>(std::floor(q * static_cast<double>(m) / 2.0));
  if (2 * drop >= m) throw input_error("trimmed_mean: trimming removes all samples");
  const auto order = sort_indices(losses, /*descending=*/false);
  double acc = 0.0;
  for (std::size_t k = drop; k < m - drop; ++k) acc += losses[order[k]];
  return acc / static_cast<double>(m - 2 * drop);
}

inline QCurve trimmed_curve(std::span<const double> losses,
                            std::span<const double> q_grid,
                            std::string action_label = {}) {
  detail::check_grid(q_grid, "trimmed_curve");
  QCurve out{{}, {}, std::move(action_label), CurveKind::trimmed};
  for (double q : q_grid) {
    if (q >= 1.0) continue;
    const std::size_t m = losses.size();
    const std::size_t drop =
        static_cast<std::size_t>(std::floor(q * static_cast<double>(m) / 2.0));
    if (2 * drop >= m) continue;  // fully trimmed grid points are skipped
    out.q.push_back(q);
    out.value.push_back(trimmed_mean(losses, q));
  }
  if (out.q.empty()) throw input_error("trimmed_curve: no evaluable grid points");
  return out;
}

// Cumulative expected loss: J(k/m) = (1/m) * sum of the k largest losses,
// linearly interpolated, with J(0) = 0 and J(1) = sample mean.
inline QCurve cel_curve(std::span<const double> losses,
                        std::span<const double> q_grid,
                        std::string action_label = {}) {
  if (losses.size() < 2) throw input_error("cel_curve: need m >= 2");
  detail::check_grid(q_grid, "cel_curve");
  const std::size_t m = losses.size();
  const auto order = sort_indices(losses, /*descending=*/true);
  std::vector<double> xs(m + 1), ys(m + 1);
  xs[0] = 0.0;
  ys[0] = 0.0;
  double partial = 0.0;
  for (std::size_t k = 1; k <= m; ++k) {
    partial += losses[order[k - 1]];
    xs[k] = static_cast<double>(k) / static_cast<double>(m);
    ys[k] = partial / static_cast<double>(m);
  }
  // Pin J(1) to the exact uniform expected loss (same summation order).
  ys[m] = expected_loss(WeightVector::uniform(m), losses);
  QCurve out{{}, {}, std::move(action_label), CurveKind::cel};
  out.q.assign(q_grid.begin(), q_grid.end());
  out.value.reserve(q_grid.size());
  for (double q : q_grid) out.value.push_back(detail::interp(xs, ys, q));
  return out;
}

namespace detail {

inline double cvar_at(std::span<const double> losses, double q) {
  const std::size_t m = losses.size();
  const auto order = sort_indices(losses, /*descending=*/true);
  std::vector<double> xs(m + 1), ys(m + 1);
  xs[0] = 0.0;
  ys[0] = losses[order[0]];
  double partial = 0.0;
  for (std::size_t k = 1; k <= m; ++k) {
    partial += losses[order[k - 1]];
    xs[k] = static_cast<double>(k) / static_cast<double>(m);
    ys[k] = partial / static_cast<double>(k);
  }
  return interp(xs, ys, q);
}

inline std::size_t argmin_index(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[best]) best = i;
  return best;
}

}  // namespace detail

// Largest grid q at which the expected-loss-optimal action fails to be
// CVaR(q)-optimal; absent when it is optimal over the whole grid.
inline std::optional<double> cvar_crossing(const NormalizedLossMatrix& lm,
                                           std::span<const double> q_grid) {
  if (lm.num_actions() < 2) throw input_error("cvar_crossing: need k >= 2 actions");
  detail::check_grid(q_grid, "cvar_crossing");
  const std::size_t k = lm.num_actions();
  std::vector<std::vector<double>> cols(k);
  std::vector<double> means(k);
  for (std::size_t a = 0; a < k; ++a) {
    cols[a] = lm.action_losses(a);
    means[a] = mean(cols[a]);
  }
  const std::size_t bayes = detail::argmin_index(means);
  for (std::size_t gi = q_grid.size(); gi-- > 0;) {
    const double q = q_grid[gi];
    if (q == 0.0) continue;
    std::vector<double> vals(k);
    for (std::size_t a = 0; a < k; ++a) vals[a] = detail::cvar_at(cols[a], q);
    if (detail::argmin_index(vals) != bayes) return q;
  }
  return std::nullopt;
}

// Leave-one-out reweightings: psi without each datum (weights 1/f(x_j|th_i))
// and, when a log-prior is available, psi without the prior.
struct LOOReport {
  Matrix psi_loo;                 // k x n
  std::vector<double> psi_noprior;  // length k, empty if no log_prior
  std::vector<double> psi_base;     // length k
  std::vector<double> ess_datum;    // length n
  double ess_noprior = 0.0;         // 0 if no log_prior
};

namespace detail {

// Normalized weights proportional to exp(log_w), computed with
// max-subtraction.
inline WeightVector softmax_weights(std::span<const double> log_w) {
  const double mx = *std::max_element(log_w.begin(), log_w.end());
  WeightVector out{std::vector<double>(log_w.size())};
  double sum = 0.0;
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    out.w[i] = std::exp(std::min(log_w[i] - mx, 700.0));
    sum += out.w[i];
  }
  for (double& v : out.w) v /= sum;
  return out;
}

}  // namespace detail

inline LOOReport loo_sensitivity(const SampleBag& bag,
                                 const NormalizedLossMatrix& lm) {
  bag.validate();
  if (!bag.log_lik_terms)
    throw input_error("loo_sensitivity: missing log_lik_terms (loglik_* columns)");
  if (lm.num_samples() != bag.m())
    throw input_error("loo_sensitivity: loss matrix row count != m");
  const std::size_t m = bag.m();
  const std::size_t n = bag.log_lik_terms->cols;
  const std::size_t k = lm.num_actions();

  LOOReport rep;
  rep.psi_loo = Matrix(k, n);
  rep.psi_base.resize(k);
  rep.ess_datum.resize(n);
  const WeightVector uni = WeightVector::uniform(m);
  std::vector<std::vector<double>> cols(k);
  for (std::size_t a = 0; a < k; ++a) {
    cols[a] = lm.action_losses(a);
    rep.psi_base[a] = expected_loss(uni, cols[a]);
  }
  std::vector<double> log_w(m);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) log_w[i] = -bag.log_lik_terms->at(i, j);
    const WeightVector w = detail::softmax_weights(log_w);
    rep.ess_datum[j] = effective_sample_size(w);
    for (std::size_t a = 0; a < k; ++a) rep.psi_loo.at(a, j) = expected_loss(w, cols[a]);
  }
  if (bag.log_prior) {
    for (std::size_t i = 0; i < m; ++i) log_w[i] = -(*bag.log_prior)[i];
    const WeightVector w = detail::softmax_weights(log_w);
    rep.ess_noprior = effective_sample_size(w);
    rep.psi_noprior.resize(k);
    for (std::size_t a = 0; a < k; ++a) rep.psi_noprior[a] = expected_loss(w, cols[a]);
  }
  return rep;
}

// (log-density, loss) pairs in original sample order.
inline std::vector<std::pair<double, double>> density_loss_scatter(
    const SampleBag& bag, std::span<const double> losses) {
  if (!bag.log_density)
    throw input_error("density_loss_scatter: missing log_density column");
  if (losses.size() != bag.m())
    throw input_error("density_loss_scatter: loss length != m");
  std::vector<std::pair<double, double>> out;
  out.reserve(bag.m());
  for (std::size_t i = 0; i < bag.m(); ++i)
    out.emplace_back((*bag.log_density)[i], losses[i]);
  return out;
}

}  // namespace decisens
