#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decisens/core.hpp"

namespace decisens {

// Monte Carlo representation of the reference model: m parameter draws with
// optional per-sample log-density, per-datum log-likelihood terms and
// log-prior.
struct SampleBag {
  Matrix samples;  // m x d
  std::optional<std::vector<double>> log_density;
  std::optional<Matrix> log_lik_terms;  // m x n
  std::optional<std::vector<double>> log_prior;

  std::size_t m() const { return samples.rows; }
  std::size_t d() const { return samples.cols; }

  void validate() const {
    if (samples.rows < 2) throw input_error("SampleBag: need m >= 2 samples");
    if (samples.cols < 1) throw input_error("SampleBag: need d >= 1 columns");
    if (!samples.all_finite())
      throw input_error("SampleBag: non-finite entry in samples");
    if (log_density) {
      if (log_density->size() != samples.rows)
        throw input_error("SampleBag: log_density length != m");
      for (double v : *log_density)
        if (!std::isfinite(v))
          throw input_error("SampleBag: non-finite entry in log_density");
    }
    if (log_lik_terms) {
      if (log_lik_terms->rows != samples.rows)
        throw input_error("SampleBag: log_lik_terms leading dimension != m");
      if (!log_lik_terms->all_finite())
        throw input_error("SampleBag: non-finite entry in log_lik_terms");
    }
    if (log_prior) {
      if (log_prior->size() != samples.rows)
        throw input_error("SampleBag: log_prior length != m");
      for (double v : *log_prior)
        if (!std::isfinite(v))
          throw input_error("SampleBag: non-finite entry in log_prior");
    }
  }
};

// Losses rescaled to [0,1] by one global affine map, with the back-transform
// retained.  A constant raw matrix maps to all 0.5 and sets `degenerate`;
// downstream tilting treats that case as "uniform weights for every radius".
struct NormalizedLossMatrix {
  Matrix values;  // m x k, entries in [0,1]
  double loss_min = 0.0;
  double loss_max = 1.0;
  bool degenerate = false;
  std::vector<std::string> action_labels;

  std::size_t num_samples() const { return values.rows; }
  std::size_t num_actions() const { return values.cols; }

  std::vector<double> action_losses(std::size_t a) const {
    return values.column(a);
  }

  // Map a normalized value back to raw loss units.
  double denormalize(double x) const {
    return degenerate ? loss_min : loss_min + x * (loss_max - loss_min);
  }
};

struct WeightVector {
  std::vector<double> w;

  std::size_t size() const { return w.size(); }

  void validate() const {
    double sum = 0.0;
    for (double v : w) {
      if (!(v >= 0.0)) throw input_error("WeightVector: negative or NaN weight");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw input_error("WeightVector: weights do not sum to 1");
  }

  static WeightVector uniform(std::size_t m) {
    return WeightVector{std::vector<double>(m, 1.0 / static_cast<double>(m))};
  }
};

inline NormalizedLossMatrix normalize_losses(const Matrix& raw,
                                             std::vector<std::string> labels) {
  if (raw.rows < 2) throw input_error("normalize_losses: need m >= 2 rows");
  if (raw.cols < 1) throw input_error("normalize_losses: need k >= 1 columns");
  if (labels.size() != raw.cols)
    throw input_error("normalize_losses: label count != number of actions");
  if (!raw.all_finite())
    throw input_error("normalize_losses: non-finite loss entry");

  const double lo = *std::min_element(raw.data.begin(), raw.data.end());
  const double hi = *std::max_element(raw.data.begin(), raw.data.end());

  NormalizedLossMatrix out;
  out.loss_min = lo;
  out.loss_max = hi;
  out.action_labels = std::move(labels);
  out.values = Matrix(raw.rows, raw.cols);
  if (hi > lo) {
    // divide (not multiply by a reciprocal) so the extremes map to exactly 0/1
    for (std::size_t i = 0; i < raw.data.size(); ++i)
      out.values.data[i] = (raw.data[i] - lo) / (hi - lo);
  } else {
    out.degenerate = true;
    std::fill(out.values.data.begin(), out.values.data.end(), 0.5);
  }
  return out;
}

inline double expected_loss(const WeightVector& weights,
                            std::span<const double> losses) {
  if (weights.size() != losses.size())
    throw input_error("expected_loss: weight/loss length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) acc += weights.w[i] * losses[i];
  return acc;
}

// 1 / sum w_i^2, in [1, m]; m iff uniform.
inline double effective_sample_size(const WeightVector& weights) {
  double s = 0.0;
  for (double v : weights.w) s += v * v;
  return 1.0 / s;
}

}  // namespace decisens
