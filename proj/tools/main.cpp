// decisens command-line tool: loads a Monte Carlo sample bag and a loss
// matrix, runs the decision-sensitivity analyses and writes tidy CSV output
// plus a run manifest.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "decisens/csv.hpp"
#include "decisens/diagnostics.hpp"
#include "decisens/dp_neighborhood.hpp"
#include "decisens/grid.hpp"
#include "decisens/kl_tilt.hpp"
#include "decisens/reverse_kl.hpp"
#include "decisens/sample_model.hpp"
#include "decisens/screening_sim.hpp"

namespace fs = std::filesystem;
using namespace decisens;

namespace {

constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open file: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct RunContext {
  std::string subcommand;
  fs::path out_dir;
  std::vector<std::pair<std::string, std::string>> config;  // echoed key/values
  std::vector<std::pair<std::string, std::string>> input_digests;
  std::vector<std::string> warnings;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  void set(const std::string& key, const std::string& value) {
    config.emplace_back(key, value);
  }

  void digest(const std::string& path) {
    input_digests.emplace_back(path, hex64(fnv1a64_file(path)));
  }

  void warn(const std::string& msg) {
    warnings.push_back(msg);
    std::cerr << "warning: " << msg << "\n";
  }

  void write_manifest() const {
    std::ofstream out(out_dir / "manifest.txt");
    out << "tool: decisens " << kVersion << "\n";
    out << "subcommand: " << subcommand << "\n";
    for (const auto& [k, v] : config) out << k << ": " << v << "\n";
    for (const auto& [p, d] : input_digests)
      out << "input_digest: " << p << " " << d << "\n";
    for (const auto& w : warnings) out << "warning: " << w << "\n";
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    // Wall clock is the one nondeterministic manifest line.
    out << "duration_seconds: " << format_number(secs) << "\n";
  }
};

struct CommonOpts {
  std::string samples_path;
  std::string losses_path;
  std::string out_dir = "decisens_out";
  std::string q_grid_spec = "0:1:512:linear";
  std::string c_grid_spec;  // default depends on m
  std::string alpha_grid_spec = "1:1e6:25:log";
  std::size_t n_draws = 4000;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool no_normalize = false;
};

void add_common_flags(CLI::App* cmd, CommonOpts& o, bool need_samples = true) {
  auto* s = cmd->add_option("--samples", o.samples_path, "samples CSV");
  if (need_samples) s->required();
  cmd->add_option("--losses", o.losses_path, "loss matrix CSV")->required();
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--seed", o.seed, "random seed")
      ->each([&o](const std::string&) { o.seed_given = true; });
  cmd->add_option("--q-grid", o.q_grid_spec, "q grid spec start:stop:count:linear|log");
  cmd->add_option("--c-grid", o.c_grid_spec, "C grid spec");
  cmd->add_option("--alpha-grid", o.alpha_grid_spec, "alpha grid spec");
  cmd->add_option("--draws", o.n_draws, "number of Dirichlet draws");
  cmd->add_flag("--no-normalize", o.no_normalize,
                "inputs already on [0,1]; skip rescaling");
}

std::uint64_t materialize_seed(CommonOpts& o) {
  if (!o.seed_given) {
    std::random_device rd;
    o.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  return o.seed;
}

struct LoadedProblem {
  SampleBag bag;
  NormalizedLossMatrix lm;
};

NormalizedLossMatrix build_loss_matrix(const Matrix& raw,
                                       std::vector<std::string> labels,
                                       bool no_normalize) {
  if (!no_normalize) return normalize_losses(raw, std::move(labels));
  for (double v : raw.data)
    if (!(v >= 0.0 && v <= 1.0))
      throw input_error(
          "--no-normalize given but losses are not all within [0,1]");
  NormalizedLossMatrix lm;
  lm.values = raw;
  lm.loss_min = 0.0;
  lm.loss_max = 1.0;
  lm.action_labels = std::move(labels);
  return lm;
}

LoadedProblem load_problem(const CommonOpts& o, RunContext& ctx,
                           bool need_samples = true) {
  LoadedProblem p;
  auto [raw, labels] = parse_losses_csv(o.losses_path);
  ctx.digest(o.losses_path);
  p.lm = build_loss_matrix(raw, std::move(labels), o.no_normalize);
  if (!need_samples && !o.samples_path.empty()) ctx.digest(o.samples_path);
  if (need_samples) {
    p.bag = parse_samples_csv(o.samples_path);
    ctx.digest(o.samples_path);
    if (p.bag.m() != p.lm.num_samples())
      throw input_error("row count mismatch: samples has " +
                        std::to_string(p.bag.m()) + " rows, losses has " +
                        std::to_string(p.lm.num_samples()));
  }
  if (p.lm.degenerate)
    ctx.warn("loss matrix is constant; normalized values forced to 0.5");
  return p;
}

std::vector<double> default_c_grid(std::size_t m) {
  return log_grid(1e-4, std::log(static_cast<double>(m)), 64);
}

std::vector<double> resolve_c_grid(const CommonOpts& o, std::size_t m) {
  return o.c_grid_spec.empty() ? default_c_grid(m)
                               : parse_grid_spec(o.c_grid_spec);
}

std::size_t bayes_action(const NormalizedLossMatrix& lm) {
  const WeightVector uni = WeightVector::uniform(lm.num_samples());
  std::size_t best = 0;
  double best_psi = kInf;
  for (std::size_t a = 0; a < lm.num_actions(); ++a) {
    const auto col = lm.action_losses(a);
    const double psi = expected_loss(uni, col);
    if (psi < best_psi) {
      best_psi = psi;
      best = a;
    }
  }
  return best;
}

void ensure_out_dir(RunContext& ctx, const std::string& dir) {
  ctx.out_dir = dir;
  fs::create_directories(ctx.out_dir);
}

// ---------------------------------------------------------------- diagnose

struct DiagnoseOpts {
  CommonOpts common;
  bool with_loo = false;
  bool with_scatter = false;
};

void write_loo_csv(const fs::path& path, const LOOReport& rep,
                   const std::vector<std::string>& labels) {
  CsvWriter w(path.string());
  w.row({"action", "datum", "psi_loo", "psi_base", "ess"});
  for (std::size_t a = 0; a < rep.psi_base.size(); ++a) {
    for (std::size_t j = 0; j < rep.ess_datum.size(); ++j)
      w.row({labels[a], std::to_string(j + 1),
             format_number(rep.psi_loo.at(a, j)),
             format_number(rep.psi_base[a]), format_number(rep.ess_datum[j])});
    if (!rep.psi_noprior.empty())
      w.row({labels[a], "prior", format_number(rep.psi_noprior[a]),
             format_number(rep.psi_base[a]), format_number(rep.ess_noprior)});
  }
}

void run_diagnose(DiagnoseOpts& o, RunContext& ctx) {
  ensure_out_dir(ctx, o.common.out_dir);
  ctx.set("q_grid", o.common.q_grid_spec);
  const LoadedProblem p = load_problem(o.common, ctx);
  const auto q_grid = parse_grid_spec(o.common.q_grid_spec);
  std::vector<double> q_no_zero;
  for (double q : q_grid)
    if (q > 0.0) q_no_zero.push_back(q);

  CsvWriter curves((ctx.out_dir / "curves.csv").string());
  curves.row({"action", "kind", "q", "value"});
  const auto emit = [&](const QCurve& c) {
    for (std::size_t i = 0; i < c.q.size(); ++i)
      curves.row({c.action_label, to_string(c.kind), format_number(c.q[i]),
                  format_number(c.value[i])});
  };
  for (std::size_t a = 0; a < p.lm.num_actions(); ++a) {
    const auto losses = p.lm.action_losses(a);
    const std::string& label = p.lm.action_labels[a];
    emit(var_curve(losses, q_grid, label));
    emit(cvar_curve(losses, q_no_zero, label));
    emit(trimmed_curve(losses, q_grid, label));
    emit(cel_curve(losses, q_grid, label));
  }

  std::ofstream summary(ctx.out_dir / "summary.txt");
  const WeightVector uni = WeightVector::uniform(p.lm.num_samples());
  const std::size_t bayes = bayes_action(p.lm);
  summary << "baseline expected losses (normalized units):\n";
  for (std::size_t a = 0; a < p.lm.num_actions(); ++a) {
    const auto col = p.lm.action_losses(a);
    summary << "  " << p.lm.action_labels[a] << ": "
            << format_number(expected_loss(uni, col)) << "\n";
  }
  summary << "bayes_optimal_action: " << p.lm.action_labels[bayes] << "\n";
  if (p.lm.num_actions() >= 2) {
    const auto crossing = cvar_crossing(p.lm, q_no_zero);
    summary << "cvar_crossing_q: "
            << (crossing ? format_number(*crossing) : std::string("absent"))
            << "\n";
  }

  if (o.with_loo) {
    const LOOReport rep = loo_sensitivity(p.bag, p.lm);
    const double low = static_cast<double>(p.bag.m()) / 100.0;
    for (std::size_t j = 0; j < rep.ess_datum.size(); ++j)
      if (rep.ess_datum[j] < low)
        ctx.warn("LOO reweighting for datum " + std::to_string(j + 1) +
                 " has low ESS " + format_number(rep.ess_datum[j]));
    write_loo_csv(ctx.out_dir / "loo.csv", rep, p.lm.action_labels);
  }
  if (o.with_scatter) {
    CsvWriter w((ctx.out_dir / "scatter.csv").string());
    w.row({"action", "log_density", "loss"});
    for (std::size_t a = 0; a < p.lm.num_actions(); ++a) {
      const auto losses = p.lm.action_losses(a);
      for (const auto& [ld, loss] : density_loss_scatter(p.bag, losses))
        w.row({p.lm.action_labels[a], format_number(ld), format_number(loss)});
    }
  }
  ctx.write_manifest();
}

// ---------------------------------------------------------------------- kl

void run_kl(CommonOpts& o, RunContext& ctx) {
  ensure_out_dir(ctx, o.out_dir);
  const LoadedProblem p = load_problem(o, ctx);
  const auto c_grid = resolve_c_grid(o, p.lm.num_samples());
  ctx.set("c_grid", o.c_grid_spec.empty() ? "default" : o.c_grid_spec);

  const EnvelopeCurve env = envelope_curve(p.lm, c_grid);

  const double low_ess = static_cast<double>(p.lm.num_samples()) / 100.0;
  bool warned_ess = false, warned_sat = false;
  {
    CsvWriter w((ctx.out_dir / "envelope.csv").string());
    CsvWriter wr((ctx.out_dir / "envelope_raw.csv").string());
    const std::vector<std::string> header = {
        "action", "C", "lambda", "psi_sup", "psi_inf", "ess", "saturated"};
    w.row(header);
    wr.row(header);
    for (std::size_t a = 0; a < p.lm.num_actions(); ++a)
      for (std::size_t ci = 0; ci < env.c_grid.size(); ++ci) {
        const bool sat = env.saturated[a][ci] != 0;
        if (sat && !warned_sat) {
          ctx.warn("C grid exceeds the finite-atom KL bound; envelopes "
                   "saturate at the point-mass limit");
          warned_sat = true;
        }
        if (env.ess_sup[a][ci] < low_ess && !warned_ess) {
          ctx.warn("tilted weights have ESS below m/100 at large C");
          warned_ess = true;
        }
        w.row({p.lm.action_labels[a], format_number(env.c_grid[ci]),
               format_number(env.lambda_sup[a][ci]),
               format_number(env.psi_sup[a][ci]),
               format_number(env.psi_inf[a][ci]),
               format_number(env.ess_sup[a][ci]), sat ? "1" : "0"});
        wr.row({p.lm.action_labels[a], format_number(env.c_grid[ci]),
                format_number(env.lambda_sup[a][ci]),
                format_number(p.lm.denormalize(env.psi_sup[a][ci])),
                format_number(p.lm.denormalize(env.psi_inf[a][ci])),
                format_number(env.ess_sup[a][ci]), sat ? "1" : "0"});
      }
  }
  {
    CsvWriter w((ctx.out_dir / "regret.csv").string());
    w.row({"action", "rival", "C", "psi_regret"});
    for (std::size_t a = 0; a < p.lm.num_actions(); ++a) {
      if (a == env.bayes_action) continue;
      for (double c : env.c_grid) {
        const TiltedWeights t = regret_tilt(p.lm, a, env.bayes_action, c);
        w.row({p.lm.action_labels[a], p.lm.action_labels[env.bayes_action],
               format_number(c), format_number(t.psi)});
      }
      for (double c : env.c_grid) {
        const TiltedWeights t = regret_tilt(p.lm, env.bayes_action, a, c);
        w.row({p.lm.action_labels[env.bayes_action], p.lm.action_labels[a],
               format_number(c), format_number(t.psi)});
      }
    }
  }
  std::vector<double> cstars(p.lm.num_actions());
  {
    CsvWriter w((ctx.out_dir / "admissibility.csv").string());
    w.row({"action", "c_star"});
    for (std::size_t a = 0; a < p.lm.num_actions(); ++a) {
      cstars[a] = p.lm.num_actions() >= 2 ? c_star(p.lm, a) : kInf;
      w.row({p.lm.action_labels[a], format_number(cstars[a])});
    }
  }
  std::ofstream summary(ctx.out_dir / "summary.txt");
  summary << "bayes_optimal_action: " << p.lm.action_labels[env.bayes_action]
          << "\n";
  summary << "envelope_crossing_C: "
          << (env.crossing_c ? format_number(*env.crossing_c)
                             : std::string("absent"))
          << "\n";
  for (std::size_t a = 0; a < p.lm.num_actions(); ++a)
    summary << "c_star " << p.lm.action_labels[a] << ": "
            << format_number(cstars[a]) << "\n";
  ctx.write_manifest();
}

// ---------------------------------------------------------------- calibrate

void run_calibrate(CommonOpts& o, RunContext& ctx) {
  ensure_out_dir(ctx, o.out_dir);
  const LoadedProblem p = load_problem(o, ctx);
  const auto c_grid = resolve_c_grid(o, p.lm.num_samples());
  ctx.set("c_grid", o.c_grid_spec.empty() ? "default" : o.c_grid_spec);
  const std::size_t bayes = bayes_action(p.lm);
  const auto losses = p.lm.action_losses(bayes);
  const CalibrationReport rep = calibration_report(losses, c_grid);
  if (p.lm.num_samples() < 100)
    ctx.warn("m < 100: top-mass statistic uses the top " +
             std::to_string(rep.top_count) + " atoms (fraction " +
             format_number(rep.top_fraction) + ")");
  CsvWriter w((ctx.out_dir / "calibration.csv").string());
  w.row({"C", "weight_variance", "top1pct_mass", "ess"});
  for (std::size_t i = 0; i < rep.c_grid.size(); ++i)
    w.row({format_number(rep.c_grid[i]), format_number(rep.weight_variance[i]),
           format_number(rep.top_mass[i]), format_number(rep.ess[i])});
  std::ofstream summary(ctx.out_dir / "summary.txt");
  summary << "calibration_action: " << p.lm.action_labels[bayes] << "\n";
  summary << "C_max: "
          << (rep.c_max ? format_number(*rep.c_max) : std::string("absent"))
          << "\n";
  ctx.write_manifest();
}

// --------------------------------------------------------------- reverse-kl

void run_reverse_kl(CommonOpts& o, RunContext& ctx) {
  ensure_out_dir(ctx, o.out_dir);
  const LoadedProblem p = load_problem(o, ctx);
  const auto c_grid = resolve_c_grid(o, p.lm.num_samples());
  ctx.set("c_grid", o.c_grid_spec.empty() ? "default" : o.c_grid_spec);
  CsvWriter w((ctx.out_dir / "reverse_envelope.csv").string());
  w.row({"action", "C", "nu", "psi", "kl_rev", "min_weight"});
  for (std::size_t a = 0; a < p.lm.num_actions(); ++a) {
    const auto losses = p.lm.action_losses(a);
    for (double c : c_grid) {
      const ReverseSolution sol = solve_reverse(losses, c, TiltDirection::sup);
      const double min_w =
          *std::min_element(sol.weights.w.begin(), sol.weights.w.end());
      w.row({p.lm.action_labels[a], format_number(c), format_number(sol.nu),
             format_number(sol.psi), format_number(sol.kl_rev),
             format_number(min_w)});
    }
  }
  ctx.write_manifest();
}

// ----------------------------------------------------------------------- dp

void run_dp(CommonOpts& o, RunContext& ctx) {
  ensure_out_dir(ctx, o.out_dir);
  const std::uint64_t seed = materialize_seed(o);
  ctx.set("seed", std::to_string(seed));
  ctx.set("alpha_grid", o.alpha_grid_spec);
  ctx.set("n_draws", std::to_string(o.n_draws));
  const LoadedProblem p = load_problem(o, ctx, /*need_samples=*/false);
  const auto alpha_grid = parse_grid_spec(o.alpha_grid_spec);

  const OptimalityProfile prof =
      probability_of_optimality(p.lm, alpha_grid, o.n_draws, seed);
  {
    CsvWriter w((ctx.out_dir / "profile.csv").string());
    w.row({"alpha", "action", "prob_optimal", "stderr"});
    for (std::size_t ai = 0; ai < alpha_grid.size(); ++ai)
      for (std::size_t a = 0; a < p.lm.num_actions(); ++a)
        w.row({format_number(alpha_grid[ai]), p.lm.action_labels[a],
               format_number(prof.prob.at(ai, a)),
               format_number(prof.stderr_.at(ai, a))});
  }
  {
    const auto z_grid = linear_grid(0.0, 1.0, 101);
    CsvWriter w((ctx.out_dir / "bands.csv").string());
    w.row({"alpha", "z", "lower", "upper"});
    for (double alpha : alpha_grid) {
      const ConfidenceBands b =
          confidence_bands(alpha, 0.95, z_grid, o.n_draws, seed);
      for (std::size_t i = 0; i < z_grid.size(); ++i)
        w.row({format_number(alpha), format_number(z_grid[i]),
               format_number(b.lower[i]), format_number(b.upper[i])});
    }
  }
  {
    const auto x_grid = linear_grid(0.05, 0.95, 19);
    CsvWriter w((ctx.out_dir / "l1.csv").string());
    w.row({"alpha", "x", "expected_l1"});
    for (double alpha : alpha_grid)
      for (double x : x_grid)
        w.row({format_number(alpha), format_number(x),
               format_number(expected_l1_distance(alpha, x))});
  }
  ctx.write_manifest();
}

// ------------------------------------------------------------------ loo

void run_loo(CommonOpts& o, RunContext& ctx) {
  ensure_out_dir(ctx, o.out_dir);
  const LoadedProblem p = load_problem(o, ctx);
  const LOOReport rep = loo_sensitivity(p.bag, p.lm);
  const double low = static_cast<double>(p.bag.m()) / 100.0;
  for (std::size_t j = 0; j < rep.ess_datum.size(); ++j)
    if (rep.ess_datum[j] < low)
      ctx.warn("LOO reweighting for datum " + std::to_string(j + 1) +
               " has low ESS " + format_number(rep.ess_datum[j]));
  write_loo_csv(ctx.out_dir / "loo.csv", rep, p.lm.action_labels);
  ctx.write_manifest();
}

// ------------------------------------------------- simulate-screening

struct SimOpts {
  TransitionParams params;
  std::vector<double> ages;
  std::vector<double> freqs;
  std::size_t m = 2000;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = "decisens_out";
  bool demo = false;
  std::size_t demo_draws = 500;
};

void write_screening_outputs(const ScreeningDataset& ds, RunContext& ctx) {
  {
    CsvWriter w((ctx.out_dir / "samples.csv").string());
    w.row({"tB", "tC", "tD"});
    for (std::size_t i = 0; i < ds.bag.m(); ++i)
      w.row({format_number(ds.bag.samples.at(i, 0)),
             format_number(ds.bag.samples.at(i, 1)),
             format_number(ds.bag.samples.at(i, 2))});
  }
  {
    CsvWriter w((ctx.out_dir / "losses.csv").string());
    w.row(ds.labels);
    for (std::size_t i = 0; i < ds.raw_losses.rows; ++i) {
      std::vector<std::string> row;
      for (std::size_t a = 0; a < ds.raw_losses.cols; ++a)
        row.push_back(format_number(ds.raw_losses.at(i, a)));
      w.row(row);
    }
  }
}

void run_simulate_screening(SimOpts& o, RunContext& ctx) {
  ensure_out_dir(ctx, o.out_dir);
  if (!o.seed_given) {
    std::random_device rd;
    o.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  ctx.set("seed", std::to_string(o.seed));
  ctx.set("m", std::to_string(o.m));
  ctx.set("r", format_number(o.params.r));
  ctx.set("weibull", format_number(o.params.weibull_shape) + "/" +
                         format_number(o.params.weibull_scale));
  ctx.set("note",
          "lognormal/loglogistic/false-negative defaults are placeholders, "
          "not literature-calibrated");

  std::vector<ScheduleAction> schedules;
  for (double age : o.ages)
    for (double f : o.freqs) schedules.push_back({age, f});
  const ScreeningDataset ds = generate_dataset(o.params, schedules, o.m, o.seed);
  write_screening_outputs(ds, ctx);
  ctx.write_manifest();

  if (o.demo) {
    const std::string samples = (ctx.out_dir / "samples.csv").string();
    const std::string losses = (ctx.out_dir / "losses.csv").string();
    {
      DiagnoseOpts d;
      d.common.samples_path = samples;
      d.common.losses_path = losses;
      d.common.out_dir = (ctx.out_dir / "demo_diagnose").string();
      d.common.q_grid_spec = "0:1:256:linear";
      RunContext sub;
      sub.subcommand = "diagnose";
      run_diagnose(d, sub);
    }
    {
      CommonOpts c;
      c.samples_path = samples;
      c.losses_path = losses;
      c.out_dir = (ctx.out_dir / "demo_kl").string();
      c.c_grid_spec = "1e-4:2:32:log";
      RunContext sub;
      sub.subcommand = "kl";
      run_kl(c, sub);
    }
    {
      CommonOpts c;
      c.samples_path = samples;
      c.losses_path = losses;
      c.out_dir = (ctx.out_dir / "demo_dp").string();
      c.alpha_grid_spec = "1:1e6:12:log";
      c.n_draws = o.demo_draws;
      c.seed = o.seed;
      c.seed_given = true;
      RunContext sub;
      sub.subcommand = "dp";
      run_dp(c, sub);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decision-sensitivity analysis for Monte Carlo loss matrices"};
  app.require_subcommand(1);

  DiagnoseOpts diag;
  auto* cmd_diag = app.add_subcommand("diagnose", "loss-distribution curves");
  add_common_flags(cmd_diag, diag.common);
  cmd_diag->add_flag("--loo", diag.with_loo, "also emit LOO sensitivity");
  cmd_diag->add_flag("--scatter", diag.with_scatter,
                     "also emit density-vs-loss scatter");

  CommonOpts kl_opts;
  auto* cmd_kl = app.add_subcommand("kl", "KL envelopes and admissibility");
  add_common_flags(cmd_kl, kl_opts);

  CommonOpts rev_opts;
  auto* cmd_rev = app.add_subcommand("reverse-kl", "reverse-KL envelope");
  add_common_flags(cmd_rev, rev_opts);

  CommonOpts dp_opts;
  auto* cmd_dp = app.add_subcommand("dp", "Dirichlet-process neighbourhood");
  add_common_flags(cmd_dp, dp_opts, /*need_samples=*/false);

  CommonOpts loo_opts;
  auto* cmd_loo = app.add_subcommand("loo", "leave-one-out sensitivity");
  add_common_flags(cmd_loo, loo_opts);

  CommonOpts cal_opts;
  auto* cmd_cal = app.add_subcommand("calibrate", "tilted-weight degeneracy");
  add_common_flags(cmd_cal, cal_opts);

  SimOpts sim;
  sim.ages = {55, 57, 59, 61, 63, 65, 67, 69};
  sim.freqs = {9, 12, 15, 18, 24};
  auto* cmd_sim =
      app.add_subcommand("simulate-screening", "semi-Markov screening example");
  cmd_sim->add_option("--m", sim.m, "number of simulated individuals");
  cmd_sim->add_option("--seed", sim.seed, "random seed")
      ->each([&sim](const std::string&) { sim.seed_given = true; });
  cmd_sim->add_option("--out", sim.out_dir, "output directory");
  cmd_sim->add_option("--r", sim.params.r, "screen-to-disease cost ratio");
  cmd_sim->add_option("--ages", sim.ages, "first-screen ages (years)");
  cmd_sim->add_option("--frequencies-months", sim.freqs, "screen intervals");
  cmd_sim->add_option("--weibull-shape", sim.params.weibull_shape);
  cmd_sim->add_option("--weibull-scale", sim.params.weibull_scale);
  cmd_sim->add_option("--lognormal-mu", sim.params.lognormal_mu);
  cmd_sim->add_option("--lognormal-sigma2", sim.params.lognormal_sigma2);
  cmd_sim->add_option("--loglogistic-kappa", sim.params.loglogistic_kappa);
  cmd_sim->add_option("--loglogistic-rho", sim.params.loglogistic_rho);
  cmd_sim->add_option("--b0", sim.params.b0);
  cmd_sim->add_option("--b1", sim.params.b1);
  cmd_sim->add_option("--t-bar", sim.params.t_bar);
  cmd_sim->add_flag("--demo", sim.demo,
                    "chain diagnose/kl/dp on the generated data");
  cmd_sim->add_option("--demo-draws", sim.demo_draws,
                      "Dirichlet draws used by the demo dp stage");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_diag->parsed()) {
      RunContext ctx;
      ctx.subcommand = "diagnose";
      run_diagnose(diag, ctx);
    } else if (cmd_kl->parsed()) {
      RunContext ctx;
      ctx.subcommand = "kl";
      run_kl(kl_opts, ctx);
    } else if (cmd_rev->parsed()) {
      RunContext ctx;
      ctx.subcommand = "reverse-kl";
      run_reverse_kl(rev_opts, ctx);
    } else if (cmd_dp->parsed()) {
      RunContext ctx;
      ctx.subcommand = "dp";
      run_dp(dp_opts, ctx);
    } else if (cmd_loo->parsed()) {
      RunContext ctx;
      ctx.subcommand = "loo";
      run_loo(loo_opts, ctx);
    } else if (cmd_cal->parsed()) {
      RunContext ctx;
      ctx.subcommand = "calibrate";
      run_calibrate(cal_opts, ctx);
    } else if (cmd_sim->parsed()) {
      RunContext ctx;
      ctx.subcommand = "simulate-screening";
      run_simulate_screening(sim, ctx);
    }
  } catch (const input_error& e) {
    std::cerr << "ERROR input_error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ERROR internal_error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
