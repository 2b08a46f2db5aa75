#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "decisens/core.hpp"
#include "decisens/rng.hpp"
#include "decisens/sample_model.hpp"

namespace decisens {

// A screening schedule: first screen at age t0 (years), repeated every
// delta months.
struct ScheduleAction {
  double t0_years = 0.0;
  double delta_months = 0.0;

  std::string label() const {
    return "s" + std::to_string(static_cast<long long>(t0_years)) + "_" +
           std::to_string(static_cast<long long>(delta_months));
  }
};

// Transition-time and screening parameters of the four-state semi-Markov
// progression model.  Only the Weibull pair and r are literature-anchored;
// the remaining defaults are documented placeholders.
struct TransitionParams {
  double weibull_shape = 7.233;     // death time (years)
  double weibull_scale = 82.651;
  double lognormal_mu = 4.2195;     // preclinical onset: median ~ 68 years
  double lognormal_sigma2 = 0.0225;
  double loglogistic_kappa = 5.0;   // sojourn shape
  double loglogistic_rho = 2.5;     // sojourn scale = median (years)
  double b0 = -2.0;                 // false-negative logistic intercept
  double b1 = -0.05;                // slope per year from t_bar
  double t_bar = 60.0;              // mean age at study entry
  double r = 1e-3;                  // screen cost vs clinical event

  void validate() const {
    if (!(weibull_shape > 0 && weibull_scale > 0 && lognormal_sigma2 > 0 &&
          loglogistic_kappa > 0 && loglogistic_rho > 0 && r > 0))
      throw input_error("TransitionParams: scale/shape/r must be positive");
  }

  // Age-dependent false-negative rate of a single screen.
  double false_negative(double age) const {
    return 1.0 / (1.0 + std::exp(-b0 - b1 * (age - t_bar)));
  }
};

// One simulated individual: onset of the preclinical state, sojourn until
// the clinical state, and death time.
struct IndividualTimes {
  double tB = 0.0;
  double tC = 0.0;
  double tD = 0.0;
};

// Marginal transition-time sampling via inverse CDFs on a dedicated stream.
inline IndividualTimes sample_individual(const TransitionParams& p,
                                         Substream& rng) {
  p.validate();
  IndividualTimes t;
  const double u_d = rng.uniform();
  t.tD = p.weibull_scale * std::pow(-std::log(u_d), 1.0 / p.weibull_shape);
  t.tB = std::exp(p.lognormal_mu + std::sqrt(p.lognormal_sigma2) * rng.normal());
  const double u_c = rng.uniform();
  t.tC = p.loglogistic_rho *
         std::pow(u_c / (1.0 - u_c), 1.0 / p.loglogistic_kappa);
  return t;
}

struct ScreenOutcome {
  double loss = 0.0;
  int n_screens = 0;
  int clinical = 0;
};

// Walk the schedule for one individual.  detect_u maps a screen-age key
// (age in months, scaled) to a uniform draw; schedules sharing a screen age
// share the draw, which pairs the schedule comparison on common random
// numbers.
template <class UniformFn>
ScreenOutcome loss_for_schedule(const ScheduleAction& action,
                                const IndividualTimes& t,
                                const TransitionParams& p,
                                UniformFn&& detect_u) {
  if (!(action.t0_years > 0 && action.delta_months > 0))
    throw input_error("ScheduleAction: t0 and delta must be positive");
  ScreenOutcome out;
  const double onset_clinical = t.tB + t.tC;
  bool detected = false;
  for (int k = 0;; ++k) {
    const double month =
        action.t0_years * 12.0 + static_cast<double>(k) * action.delta_months;
    const double age = month / 12.0;
    if (age >= t.tD || age >= onset_clinical || detected) break;
    ++out.n_screens;
    if (age >= t.tB) {
      const double u = detect_u(static_cast<std::int64_t>(std::llround(month * 1024.0)));
      if (u < 1.0 - p.false_negative(age)) detected = true;
    }
  }
  // The clinical event fires when onset precedes death and either no screen
  // caught the tumour or the preclinical state began before the first screen.
  if (onset_clinical < t.tD && (!detected || t.tB < action.t0_years))
    out.clinical = 1;
  out.loss = p.r * out.n_screens + out.clinical;
  return out;
}

inline std::vector<ScheduleAction> default_schedules() {
  std::vector<ScheduleAction> out;
  for (int age = 55; age <= 69; age += 2)
    for (int freq : {9, 12, 15, 18, 24})
      out.push_back({static_cast<double>(age), static_cast<double>(freq)});
  return out;
}

struct ScreeningDataset {
  SampleBag bag;               // samples columns: tB, tC, tD
  Matrix raw_losses;           // m x |schedules|
  std::vector<std::string> labels;
};

namespace detail {
constexpr std::uint64_t kTimesStreamTag = 0x54494d4553ULL;
constexpr std::uint64_t kDetectStreamTag = 0x44455445ULL;
}  // namespace detail

inline ScreeningDataset generate_dataset(const TransitionParams& p,
                                         const std::vector<ScheduleAction>& schedules,
                                         std::size_t m, std::uint64_t seed) {
  p.validate();
  if (m < 2) throw input_error("generate_dataset: need m >= 2");
  if (schedules.empty()) throw input_error("generate_dataset: no schedules");

  ScreeningDataset ds;
  ds.bag.samples = Matrix(m, 3);
  ds.raw_losses = Matrix(m, schedules.size());
  for (const auto& s : schedules) ds.labels.push_back(s.label());

  for (std::size_t i = 0; i < m; ++i) {
    Substream rng(seed, detail::kTimesStreamTag ^ (i * 0x100000001b3ULL));
    const IndividualTimes t = sample_individual(p, rng);
    ds.bag.samples.at(i, 0) = t.tB;
    ds.bag.samples.at(i, 1) = t.tC;
    ds.bag.samples.at(i, 2) = t.tD;
    const auto detect_u = [&](std::int64_t key) {
      Substream s(seed, detail::kDetectStreamTag ^
                            (i * 0x9e3779b97f4a7c15ULL) ^
                            static_cast<std::uint64_t>(key) * 0xff51afd7ed558ccdULL);
      return s.uniform();
    };
    for (std::size_t a = 0; a < schedules.size(); ++a)
      ds.raw_losses.at(i, a) = loss_for_schedule(schedules[a], t, p, detect_u).loss;
  }
  return ds;
}

}  // namespace decisens
