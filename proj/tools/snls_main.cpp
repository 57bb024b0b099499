#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "snls/error.hpp"
#include "snls/identities.hpp"
#include "snls/io.hpp"
#include "snls/montecarlo.hpp"

namespace fs = std::filesystem;
using namespace snls;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitBlowup = 2;

struct Context {
  RunConfig config;
  Problem problem;
  Field x;
  fs::path out;
  Summary summary;
};

double rel_drift(double a, double b) { return std::abs(b - a) / std::max(std::abs(a), 1e-300); }

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw InvalidArgument("cannot write " + p.string());
  return f;
}

SolveOptions solve_options(const RunConfig& c) {
  SolveOptions o;
  o.stride = c.run.stride;
  o.thresholds = {c.run.h1_factor, c.run.spacetime_factor};
  o.detect_blowup = c.run.detect_blowup;
  o.adaptive_dt = c.run.adaptive_dt;
  return o;
}

const char* status_name(StatusKind k) {
  switch (k) {
    case StatusKind::finished: return "finished";
    case StatusKind::blowup: return "blowup";
    case StatusKind::numeric_failure: return "numeric-failure";
  }
  return "?";
}

void write_diagnostics(const fs::path& p, const Diagnostics& dg) {
  auto f = open_out(p);
  write_diagnostics_csv(dg, f);
}

void write_snapshots(const fs::path& dir, const Trajectory& traj) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%08zu.bin", traj.snapshot_steps[i]);
    write_snapshot(dir / name, traj.snapshots[i], traj.snapshot_times[i]);
  }
}

void summarize_trajectory(Summary& s, const std::string& prefix, const Trajectory& traj) {
  const auto& dg = traj.diagnostics;
  s.set(prefix + "status", status_name(traj.status.kind));
  if (traj.status.kind != StatusKind::finished) {
    s.set(prefix + "blowup_time", traj.status.time);
    s.set(prefix + "reason", traj.status.reason);
  }
  s.set(prefix + "steps", traj.steps_taken());
  s.set(prefix + "final_time", dg.time.back());
  s.set(prefix + "mass_initial", dg.mass.front());
  s.set(prefix + "mass_final", dg.mass.back());
  s.set(prefix + "mass_rel_drift", rel_drift(dg.mass.front(), dg.mass.back()));
  s.set(prefix + "hamiltonian_initial", dg.hamiltonian.front());
  s.set(prefix + "hamiltonian_final", dg.hamiltonian.back());
  s.set(prefix + "hamiltonian_rel_drift", rel_drift(dg.hamiltonian.front(), dg.hamiltonian.back()));
  double edge = 0.0;
  for (const Field& f : traj.snapshots) edge = std::max(edge, boundary_ratio(f));
  if (traj.final_state) edge = std::max(edge, boundary_ratio(*traj.final_state));
  s.set(prefix + "boundary_ratio", edge);
  s.set(prefix + "boundary_valid", edge <= kBoundaryTolerance);
}

int cmd_simulate(Context& ctx) {
  const auto& c = ctx.config;
  const auto& spec = ctx.problem.spec;
  const WienerPath path = sample_path(*ctx.problem.noise, spec.horizon, ctx.problem.steps, c.run.seed, 0);
  const SolveOptions opt = solve_options(c);
  std::optional<Trajectory> direct, rescaled;
  if (c.problem.scheme != Scheme::rescaled) direct = solve_direct(ctx.x, path, spec, opt);
  if (c.problem.scheme != Scheme::direct) {
    if (opt.adaptive_dt) throw InvalidArgument("run.adaptive_dt is only supported by the direct scheme");
    rescaled = to_direct_variables(solve_rescaled(ctx.x, path, spec, opt), path, *ctx.problem.noise);
  }
  const Trajectory& primary = direct ? *direct : *rescaled;
  write_diagnostics(ctx.out / "diagnostics.csv", primary.diagnostics);
  if (c.run.snapshots) write_snapshots(ctx.out / "snapshots", primary);
  summarize_trajectory(ctx.summary, "", primary);
  if (direct && rescaled) {
    write_diagnostics(ctx.out / "diagnostics_rescaled.csv", rescaled->diagnostics);
    summarize_trajectory(ctx.summary, "rescaled_", *rescaled);
    double gap = 0.0;
    const std::size_t k = std::min(direct->snapshots.size(), rescaled->snapshots.size());
    for (std::size_t i = 0; i < k; ++i)
      gap = std::max(gap, lp_norm(direct->snapshots[i] - rescaled->snapshots[i], 2.0));
    ctx.summary.set("scheme_gap_l2", gap);
  }
  const bool blew = (direct && direct->status.kind == StatusKind::blowup) ||
                    (rescaled && rescaled->status.kind == StatusKind::blowup);
  if (primary.status.kind == StatusKind::numeric_failure)
    throw NumericFailure("non-finite state: " + primary.status.reason, primary.status.time);
  return blew ? kExitBlowup : kExitOk;
}

EnsembleConfig ensemble_config(const Context& ctx, std::size_t paths, std::size_t levels) {
  const auto& r = ctx.config.run;
  EnsembleConfig e;
  e.paths = paths;
  e.seed = r.seed;
  e.steps = ctx.problem.steps;
  e.levels = levels;
  e.checkpoints = r.checkpoints;
  e.threads = r.threads;
  e.thresholds = {r.h1_factor, r.spacetime_factor};
  e.detect_blowup = r.detect_blowup;
  return e;
}

void write_path0_diagnostics(Context& ctx) {
  const auto& spec = ctx.problem.spec;
  const WienerPath path =
      sample_path(*ctx.problem.noise, spec.horizon, ctx.problem.steps, ctx.config.run.seed, 0);
  SolveOptions opt = solve_options(ctx.config);
  opt.stride = path.steps();
  write_diagnostics(ctx.out / "diagnostics.csv", solve_direct(ctx.x, path, spec, opt).diagnostics);
}

int cmd_ensemble(Context& ctx) {
  const auto& c = ctx.config;
  const EnsembleReport rep =
      run_ensemble(ctx.x, ctx.problem.spec, ensemble_config(ctx, c.run.M, c.run.levels));
  {
    auto f = open_out(ctx.out / "ensemble.csv");
    write_csv(rep, f);
  }
  write_path0_diagnostics(ctx);
  auto& s = ctx.summary;
  s.set("paths", c.run.M);
  s.set("levels", c.run.levels);
  s.set("blowup_paths", rep.blowup_paths);
  const auto& mass_stats = rep.stats(Observable::mass);
  s.set("mass_initial", rep.initial[0]);
  s.set("mass_mean_final", mass_stats.mean.back());
  s.set("mass_se_final", mass_stats.standard_error.back());
  const MartingaleResult mt = martingale_test(rep);
  s.set("martingale_pass", mt.passed);
  s.set("martingale_max_z", mt.max_z);
  s.set("martingale_paths_sufficient", c.run.M >= 100);
  const MomentResult mm = moment_monitor(rep, 2.0);
  s.set("moment_divergent", mm.divergent);
  if (!mm.divergent) {
    s.set("moment_finite", mm.finite);
    s.set("moment_stable", mm.stable);
    s.set("sup_mass_moment", mm.sup_mass_moment.front());
    s.set("sup_energy_moment", mm.sup_energy_moment.front());
  }
  return kExitOk;
}

int cmd_verify(Context& ctx) {
  const auto& c = ctx.config;
  const auto& spec = ctx.problem.spec;
  const NoiseModel& model = *ctx.problem.noise;
  const std::size_t M = c.run.M, L = c.verify.levels;
  const std::optional<double> cutoff =
      c.verify.cutoff > 0.0 ? std::optional<double>(c.verify.cutoff) : std::nullopt;
  const char* names[] = {"mass", "hamiltonian", "lp", "h1"};
  // residual[identity][level][path]
  std::vector<std::vector<std::vector<double>>> residual(4, std::vector<std::vector<double>>(L, std::vector<double>(M)));
  std::vector<char> vanishing_ok(M, 1);
  parallel_for(M, resolve_threads(c.run.threads), [&](std::size_t i) {
    WienerPath path = sample_path(model, spec.horizon, ctx.problem.steps, c.run.seed, i);
    for (std::size_t l = 0; l < L; ++l) {
      if (l > 0) path = refine_path(path);
      SolveOptions opt = solve_options(c);
      opt.stride = 1;
      opt.adaptive_dt = false;
      const Trajectory traj = solve_direct(ctx.x, path, spec, opt);
      const IdentityReport reps[] = {mass_identity(traj, path, model), hamiltonian_identity(traj, path, spec),
                                     lp_identity(traj, path, spec), h1_identity(traj, path, spec, cutoff)};
      for (std::size_t k = 0; k < 4; ++k) residual[k][l][i] = std::abs(reps[k].terminal_residual());
      if (model.conservative()) {
        const bool zero = reps[1].term("nonlinear_drift").back() == 0.0 &&
                          reps[1].term("potential_martingale").back() == 0.0 &&
                          reps[2].term("ito_correction").back() == 0.0 &&
                          reps[2].term("martingale").back() == 0.0 &&
                          reps[0].term("martingale").back() == 0.0;
        if (!zero) vanishing_ok[i] = 0;
      }
      if (i == 0 && l == 0) {
        for (std::size_t k = 0; k < 4; ++k) {
          auto f = open_out(ctx.out / ("identity_" + std::string(names[k]) + ".csv"));
          write_csv(reps[k], f);
        }
        write_diagnostics(ctx.out / "diagnostics.csv", traj.diagnostics);
      }
    }
  });
  auto& s = ctx.summary;
  s.set("paths", M);
  s.set("levels", L);
  s.set("conservative", model.conservative());
  if (model.conservative())
    s.set("vanishing_terms_zero", std::all_of(vanishing_ok.begin(), vanishing_ok.end(), [](char v) { return v != 0; }));
  for (std::size_t k = 0; k < 4; ++k) {
    const std::string n = names[k];
    s.set(n + "_residual", *std::max_element(residual[k][0].begin(), residual[k][0].end()));
    if (L > 1) {
      std::vector<double> med;
      for (std::size_t l = 0; l < L; ++l) {
        med.push_back(median(residual[k][l]));
        s.set(n + "_median_residual_level" + std::to_string(l), med.back());
      }
      bool monotone = true;
      for (std::size_t l = 1; l < L; ++l) monotone = monotone && med[l] <= med[l - 1];
      s.set(n + "_monotone", monotone);
      s.set(n + "_order", fitted_order(med));
    }
  }
  return kExitOk;
}

int cmd_convergence(Context& ctx) {
  const auto& c = ctx.config;
  ConvergenceConfig cc;
  cc.paths = c.run.M;
  cc.seed = c.run.seed;
  cc.steps = ctx.problem.steps;
  cc.levels = c.verify.levels;
  cc.threads = c.run.threads;
  cc.scheme = c.problem.scheme == Scheme::rescaled ? ConvergenceConfig::Scheme::rescaled
                                                   : ConvergenceConfig::Scheme::direct;
  const ConvergenceResult r = convergence_order(ctx.x, ctx.problem.spec, cc);
  {
    auto f = open_out(ctx.out / "convergence.csv");
    f << "level,dt,error\n" << std::setprecision(17);
    for (std::size_t l = 0; l < r.errors.size(); ++l) f << l << ',' << r.dt[l] << ',' << r.errors[l] << '\n';
  }
  write_path0_diagnostics(ctx);
  auto& s = ctx.summary;
  s.set("paths", cc.paths);
  s.set("levels", cc.levels);
  for (std::size_t l = 0; l < r.errors.size(); ++l) s.set("error_level" + std::to_string(l), r.errors[l]);
  s.set("order", r.order);
  s.set("inconclusive", r.inconclusive);
  return kExitOk;
}

int cmd_blowup_scan(Context& ctx) {
  RunConfig c = ctx.config;
  const std::size_t L = c.verify.levels;
  std::optional<WienerPath> path;
  std::vector<double> times;
  auto& s = ctx.summary;
  for (std::size_t l = 0; l < L; ++l) {
    if (l > 0) {
      c.problem.n *= 2;
      c.problem.dt /= 2.0;
    }
    const Problem prob = build_problem(c);
    const Field x = initial_datum(c, prob.grid);
    path = path ? refine_path(*path) : sample_path(*prob.noise, prob.spec.horizon, prob.steps, c.run.seed, 0);
    SolveOptions opt = solve_options(c);
    opt.stride = path->steps();
    opt.detect_blowup = true;
    const Trajectory traj = solve_direct(x, *path, prob.spec, opt);
    const std::string tag = "level" + std::to_string(l);
    write_diagnostics(ctx.out / ("diagnostics_" + tag + ".csv"), traj.diagnostics);
    if (l == 0) write_diagnostics(ctx.out / "diagnostics.csv", traj.diagnostics);
    s.set(tag + "_n", c.problem.n);
    s.set(tag + "_dt", c.problem.dt);
    s.set(tag + "_status", status_name(traj.status.kind));
    if (traj.status.kind == StatusKind::blowup) {
      s.set(tag + "_blowup_time", traj.status.time);
      times.push_back(traj.status.time);
    }
  }
  s.set("blowup_levels", times.size());
  if (times.size() == L && L > 1) {
    double spread = 0.0;
    for (double t : times) spread = std::max(spread, std::abs(t - times.front()) / times.front());
    s.set("blowup_time_rel_spread", spread);
    s.set("blowup_time_stable", spread <= 0.1);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic nonlinear Schrodinger solver"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "Integrate one path and write diagnostics and snapshots"},
      {"ensemble", "Run a path ensemble with martingale and moment checks"},
      {"verify-identities", "Evaluate the Ito identity residuals along simulated paths"},
      {"convergence", "Estimate the strong convergence order over coupled refinements"},
      {"blowup-scan", "Detect blowup across grid and step refinements"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Run configuration file")->required();
    sub->add_option("--seed", seed, "Override run.seed");
    sub->add_option("--out", out_dir, "Override run.out");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    Context ctx{load_config(config_path), {}, Field(Grid::make(1, 8, 1.0)), {}, {}};
    if (seed) ctx.config.run.seed = *seed;
    if (!out_dir.empty()) ctx.config.run.out = out_dir;
    ctx.problem = build_problem(ctx.config);
    ctx.x = initial_datum(ctx.config, ctx.problem.grid);
    ctx.out = ctx.config.run.out;
    fs::create_directories(ctx.out);
    ctx.summary.set("command", command);
    ctx.summary.set("seed", static_cast<std::size_t>(ctx.config.run.seed));
    ctx.summary.set("regime", std::string(to_string(ctx.problem.regime.tag)));
    ctx.summary.set("global", ctx.problem.regime.global);
    {
      auto f = open_out(ctx.out / "config.ini");
      f << serialize_config(ctx.config);
    }

    int code = kExitOk;
    if (command == "simulate") code = cmd_simulate(ctx);
    else if (command == "ensemble") code = cmd_ensemble(ctx);
    else if (command == "verify-identities") code = cmd_verify(ctx);
    else if (command == "convergence") code = cmd_convergence(ctx);
    else code = cmd_blowup_scan(ctx);

    ctx.summary.set("exit_code", code);
    auto f = open_out(ctx.out / "summary.txt");
    ctx.summary.write(f);
    ctx.summary.write(std::cout);
    return code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}
