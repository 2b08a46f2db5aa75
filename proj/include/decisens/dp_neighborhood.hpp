#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "decisens/core.hpp"
#include "decisens/rng.hpp"
#include "decisens/sample_model.hpp"

namespace decisens {

// Seeded batch of Dirichlet(alpha/m, ..., alpha/m) weight vectors over the m
// atoms, with per-draw expected losses per action once filled in.
struct DirichletDrawSet {
  double alpha = 1.0;
  std::size_t n_draws = 0;
  std::uint64_t seed = 0;
  Matrix draws;          // n_draws x m
  Matrix per_draw_psi;   // n_draws x k
  std::size_t redraws = 0;  // rows rejected for non-finite weights
};

namespace detail {

// One Dirichlet row via normalized Gamma variates, generated in log space so
// small shapes do not underflow.  Returns false when the row is unusable.
inline bool dirichlet_row(Substream& rng, double shape, std::span<double> out) {
  std::vector<double> lg(out.size());
  for (double& v : lg) v = rng.log_gamma_variate(shape);
  const double lse = log_sum_exp(lg);
  if (!std::isfinite(lse)) return false;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(lg[i] - lse);
  return true;
}

constexpr std::uint64_t kDirichletStreamTag = 0x4449524943484c45ULL;

}  // namespace detail

inline DirichletDrawSet draw_dirichlet_weights(double alpha, std::size_t m,
                                               std::size_t n_draws,
                                               std::uint64_t seed) {
  if (!(alpha > 0.0)) throw input_error("draw_dirichlet_weights: alpha must be > 0");
  if (m < 2) throw input_error("draw_dirichlet_weights: need m >= 2");
  if (n_draws < 1) throw input_error("draw_dirichlet_weights: need n_draws >= 1");

  DirichletDrawSet set;
  set.alpha = alpha;
  set.n_draws = n_draws;
  set.seed = seed;
  set.draws = Matrix(n_draws, m);
  const double shape = alpha / static_cast<double>(m);
  for (std::size_t j = 0; j < n_draws; ++j) {
    // Per-draw substream: draws are reproducible independent of order.
    Substream rng(seed, detail::kDirichletStreamTag ^ j);
    std::span<double> row(set.draws.data.data() + j * m, m);
    while (!detail::dirichlet_row(rng, shape, row)) ++set.redraws;
  }
  return set;
}

inline void fill_per_draw_psi(DirichletDrawSet& set,
                              const NormalizedLossMatrix& lm) {
  const std::size_t m = lm.num_samples();
  const std::size_t k = lm.num_actions();
  if (set.draws.cols != m)
    throw input_error("fill_per_draw_psi: draw width != loss matrix rows");
  set.per_draw_psi = Matrix(set.n_draws, k);
  for (std::size_t j = 0; j < set.n_draws; ++j)
    for (std::size_t a = 0; a < k; ++a) {
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        acc += set.draws.at(j, i) * lm.values.at(i, a);
      set.per_draw_psi.at(j, a) = acc;
    }
}

// Empirical probability that each action minimizes expected loss under random
// DP reweightings, per concentration value.
struct OptimalityProfile {
  std::vector<double> alpha_grid;
  Matrix prob;    // |alpha| x k
  Matrix stderr_; // |alpha| x k
  std::size_t n_draws = 0;
  std::uint64_t seed = 0;
};

inline OptimalityProfile probability_of_optimality(
    const NormalizedLossMatrix& lm, std::span<const double> alpha_grid,
    std::size_t n_draws, std::uint64_t seed) {
  if (alpha_grid.empty())
    throw input_error("probability_of_optimality: empty alpha grid");
  if (n_draws < 1) throw input_error("probability_of_optimality: need n_draws >= 1");
  const std::size_t k = lm.num_actions();
  OptimalityProfile prof;
  prof.alpha_grid.assign(alpha_grid.begin(), alpha_grid.end());
  prof.prob = Matrix(alpha_grid.size(), k);
  prof.stderr_ = Matrix(alpha_grid.size(), k);
  prof.n_draws = n_draws;
  prof.seed = seed;
  for (std::size_t ai = 0; ai < alpha_grid.size(); ++ai) {
    // Distinct substream block per alpha: profile rows are independent.
    DirichletDrawSet set = draw_dirichlet_weights(
        alpha_grid[ai], lm.num_samples(), n_draws, seed ^ (0xA1F0ULL + ai));
    fill_per_draw_psi(set, lm);
    std::vector<std::size_t> wins(k, 0);
    for (std::size_t j = 0; j < n_draws; ++j) {
      std::size_t best = 0;
      for (std::size_t a = 1; a < k; ++a)
        if (set.per_draw_psi.at(j, a) < set.per_draw_psi.at(j, best)) best = a;
      ++wins[best];
    }
    for (std::size_t a = 0; a < k; ++a) {
      const double p = static_cast<double>(wins[a]) / static_cast<double>(n_draws);
      prof.prob.at(ai, a) = p;
      prof.stderr_.at(ai, a) =
          std::sqrt(p * (1.0 - p) / static_cast<double>(n_draws));
    }
  }
  return prof;
}

// Closed-form E|v - x| for v ~ Beta(x*alpha, (1-x)*alpha), evaluated with
// log-gamma.
inline double expected_l1_distance(double alpha, double x) {
  if (!(alpha > 0.0)) throw input_error("expected_l1_distance: alpha must be > 0");
  if (!(x > 0.0 && x < 1.0))
    throw input_error("expected_l1_distance: x must be in (0,1)");
  const double log_beta =
      std::lgamma(x * alpha) + std::lgamma((1.0 - x) * alpha) - std::lgamma(alpha);
  const double log_val = std::log(2.0) - std::log(alpha) +
                         alpha * (x * std::log(x) + (1.0 - x) * std::log(1.0 - x)) -
                         log_beta;
  return std::exp(log_val);
}

// L1 distance between the uniform-weight loss CDF and the reweighed one:
// sum over i of |v_i - i/m| times the loss increment to the next atom.
inline double l1_loss_distance(std::span<const double> sorted_losses,
                               const WeightVector& weights) {
  const std::size_t m = sorted_losses.size();
  if (weights.size() != m)
    throw input_error("l1_loss_distance: weight/loss length mismatch");
  for (std::size_t i = 1; i < m; ++i)
    if (sorted_losses[i] < sorted_losses[i - 1])
      throw input_error("l1_loss_distance: losses must be sorted ascending");
  double v = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    v += weights.w[i];
    const double x = static_cast<double>(i + 1) / static_cast<double>(m);
    acc += std::abs(v - x) * (sorted_losses[i + 1] - sorted_losses[i]);
  }
  return acc;
}

// Empirical confidence bands for DP draws around the uniform reference loss
// distribution F(z) = z on m atoms at i/m.
struct ConfidenceBands {
  std::vector<double> z_grid;
  std::vector<double> lower;
  std::vector<double> upper;
  double alpha = 1.0;
  double level = 0.95;
};

inline ConfidenceBands confidence_bands(double alpha, double level,
                                        std::span<const double> z_grid,
                                        std::size_t n_draws, std::uint64_t seed,
                                        std::size_t m = 1000) {
  if (!(level > 0.0 && level < 1.0))
    throw input_error("confidence_bands: level must be in (0,1)");
  if (z_grid.empty()) throw input_error("confidence_bands: empty z grid");
  DirichletDrawSet set = draw_dirichlet_weights(alpha, m, n_draws, seed);

  ConfidenceBands bands;
  bands.z_grid.assign(z_grid.begin(), z_grid.end());
  bands.alpha = alpha;
  bands.level = level;
  const double p_lo = (1.0 - level) / 2.0;
  const double p_hi = 1.0 - p_lo;
  // Prefix sums per draw so each z is a single lookup.
  Matrix cum(n_draws, m);
  for (std::size_t j = 0; j < n_draws; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      acc += set.draws.at(j, i);
      cum.at(j, i) = acc;
    }
  }
  std::vector<double> vals(n_draws);
  for (double z : z_grid) {
    // Atoms sit at i/m: F(z) is the cumulative weight of the first
    // floor(z*m) atoms.
    const std::size_t cnt = static_cast<std::size_t>(
        std::min(std::floor(z * static_cast<double>(m)), static_cast<double>(m)));
    for (std::size_t j = 0; j < n_draws; ++j)
      vals[j] = cnt == 0 ? 0.0 : cum.at(j, cnt - 1);
    std::sort(vals.begin(), vals.end());
    const auto quantile = [&](double p) {
      const double pos = p * static_cast<double>(n_draws - 1);
      const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
      const std::size_t hi = std::min(lo + 1, n_draws - 1);
      const double t = pos - static_cast<double>(lo);
      return vals[lo] + t * (vals[hi] - vals[lo]);
    };
    bands.lower.push_back(quantile(p_lo));
    bands.upper.push_back(quantile(p_hi));
  }
  return bands;
}

}  // namespace decisens
