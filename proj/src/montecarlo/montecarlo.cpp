#include "snls/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "snls/error.hpp"

namespace snls {

const char* to_string(Observable o) noexcept {
  switch (o) {
    case Observable::mass: return "mass";
    case Observable::hamiltonian: return "hamiltonian";
    case Observable::h1: return "h1";
    case Observable::lp: return "l_alpha_plus_1";
  }
  return "?";
}

std::size_t resolve_threads(std::size_t requested) {
  std::size_t cap = 0;
  if (const char* env = std::getenv("SNLS_THREADS")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end != env && v > 0) cap = static_cast<std::size_t>(v);
  }
  std::size_t width = requested;
  if (width == 0) width = cap > 0 ? cap : std::max(1u, std::thread::hardware_concurrency());
  if (cap > 0) width = std::min(width, cap);
  return std::max<std::size_t>(width, 1);
}

void parallel_for(std::size_t count, std::size_t width,
                  const std::function<void(std::size_t)>& body) {
  width = std::min(std::max<std::size_t>(width, 1), std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::size_t failed_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  if (width == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(width);
    for (std::size_t t = 0; t < width; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

bool PathOutcome::blowup() const {
  return std::any_of(status.begin(), status.end(),
                     [](const Status& s) { return s.kind != StatusKind::finished; });
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

double fitted_order(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i), y = std::log2(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = static_cast<double>(n);
  return -(dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

namespace {

struct LevelSample {
  Status status;
  // [observable][checkpoint]
  std::array<std::vector<double>, kObservableCount> values;
  double sup_norm = 0.0;
  double sup_energy = 0.0;
};

LevelSample sample_level(const Field& x, const WienerPath& path, const ProblemSpec& spec,
                         const EnsembleConfig& config) {
  SolveOptions opt;
  opt.stride = path.steps();
  opt.thresholds = config.thresholds;
  opt.detect_blowup = config.detect_blowup;
  const Trajectory traj = solve_direct(x, path, spec, opt);
  LevelSample s;
  s.status = traj.status;
  if (traj.status.kind != StatusKind::finished) return s;
  const Diagnostics& dg = traj.diagnostics;
  const std::size_t every = path.steps() / config.checkpoints;
  for (std::size_t k = 0; k <= config.checkpoints; ++k) {
    const std::size_t i = k * every;
    s.values[0].push_back(dg.mass[i]);
    s.values[1].push_back(dg.hamiltonian[i]);
    s.values[2].push_back(dg.h1[i]);
    s.values[3].push_back(dg.lp[i]);
  }
  const double p = spec.alpha + 1.0;
  for (std::size_t i = 0; i < dg.time.size(); ++i) {
    const double grad2 = 2.0 * (dg.hamiltonian[i] + spec.lambda / p * dg.lp[i]);
    s.sup_norm = std::max(s.sup_norm, std::sqrt(dg.mass[i]));
    s.sup_energy = std::max(s.sup_energy, grad2 + dg.lp[i]);
  }
  return s;
}

// Two-pass mean and sample variance over the selected rows, in row order.
ObservableStats fold(const std::vector<const std::vector<double>*>& rows, std::size_t width) {
  ObservableStats st;
  const double m = static_cast<double>(rows.size());
  st.mean.assign(width, 0.0);
  st.variance.assign(width, 0.0);
  st.standard_error.assign(width, 0.0);
  if (rows.empty()) return st;
  for (const auto* r : rows)
    for (std::size_t k = 0; k < width; ++k) st.mean[k] += (*r)[k];
  for (auto& v : st.mean) v /= m;
  if (rows.size() > 1) {
    for (const auto* r : rows)
      for (std::size_t k = 0; k < width; ++k) {
        const double d = (*r)[k] - st.mean[k];
        st.variance[k] += d * d;
      }
    for (std::size_t k = 0; k < width; ++k) {
      st.variance[k] /= (m - 1.0);
      st.standard_error[k] = std::sqrt(st.variance[k] / m);
    }
  }
  return st;
}

void check_config(const EnsembleConfig& c) {
  if (c.paths < 2) throw InvalidArgument("ensemble needs at least 2 paths");
  if (c.levels == 0) throw InvalidArgument("ensemble needs at least one level");
  if (c.checkpoints == 0 || c.steps % c.checkpoints != 0)
    throw InvalidArgument("steps must be a positive multiple of checkpoints");
}

}  // namespace

EnsembleReport run_ensemble(const Field& x, const ProblemSpec& spec, const EnsembleConfig& config) {
  check_config(config);
  spec.validate();
  const std::size_t M = config.paths, L = config.levels, K = config.checkpoints + 1;
  std::vector<std::vector<LevelSample>> samples(M);
  parallel_for(M, resolve_threads(config.threads), [&](std::size_t i) {
    WienerPath path = sample_path(*spec.noise, spec.horizon, config.steps, config.seed, i);
    for (std::size_t l = 0; l < L; ++l) {
      if (l > 0) path = refine_path(path);
      samples[i].push_back(sample_level(x, path, spec, config));
    }
  });

  EnsembleReport rep;
  for (std::size_t k = 0; k < K; ++k)
    rep.time.push_back(spec.horizon * static_cast<double>(k) / static_cast<double>(K - 1));
  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < M; ++i) {
    PathOutcome o;
    o.path_id = i;
    for (const auto& s : samples[i]) o.status.push_back(s.status);
    if (o.blowup())
      ++rep.blowup_paths;
    else
      used.push_back(i);
    rep.outcomes.push_back(std::move(o));
  }
  if (!used.empty())
    for (std::size_t o = 0; o < kObservableCount; ++o)
      rep.initial[o] = samples[used.front()][0].values[o][0];

  std::vector<std::vector<double>> diffs(used.size());
  for (std::size_t l = 0; l < L; ++l) {
    LevelReport lr;
    lr.dt = spec.horizon / static_cast<double>(config.steps << l);
    lr.paths_used = used.size();
    for (std::size_t o = 0; o < kObservableCount; ++o) {
      std::vector<const std::vector<double>*> rows;
      for (std::size_t i : used) rows.push_back(&samples[i][l].values[o]);
      lr.stats[o] = fold(rows, K);
      if (l > 0) {
        std::vector<const std::vector<double>*> drows;
        for (std::size_t r = 0; r < used.size(); ++r) {
          const auto& fine = samples[used[r]][l].values[o];
          const auto& coarse = samples[used[r]][0].values[o];
          diffs[r].resize(K);
          for (std::size_t k = 0; k < K; ++k) diffs[r][k] = fine[k] - coarse[k];
          drows.push_back(&diffs[r]);
        }
        lr.difference[o] = fold(drows, K);
      }
    }
    for (std::size_t i : used) {
      lr.sup_norm.push_back(samples[i][l].sup_norm);
      lr.sup_energy.push_back(samples[i][l].sup_energy);
    }
    rep.levels.push_back(std::move(lr));
  }
  return rep;
}

MartingaleResult martingale_test(const EnsembleReport& report, Observable observable,
                                 double z_limit) {
  MartingaleResult res;
  const auto o = static_cast<std::size_t>(observable);
  const ObservableStats& st = report.levels.at(0).stats[o];
  const double target = report.initial[o];
  const bool ladder = report.levels.size() > 1;
  for (std::size_t k = 0; k < report.time.size(); ++k) {
    double b = 0.0;
    if (ladder) {
      const ObservableStats& df = report.levels[1].difference[o];
      b = std::abs(df.mean[k]) + 3.0 * df.standard_error[k];
    }
    const double excess = std::max(0.0, std::abs(st.mean[k] - target) - b);
    double z = 0.0;
    // Rounding-level excess (the initial time, or a zero-variance observable)
    // is not evidence against the martingale property.
    if (k > 0 && excess > 1e-12 * std::max(1.0, std::abs(target)))
      z = st.standard_error[k] > 0.0 ? excess / st.standard_error[k]
                                     : std::numeric_limits<double>::infinity();
    res.bias.push_back(b);
    res.z.push_back(z);
    res.max_z = std::max(res.max_z, z);
  }
  res.passed = res.max_z <= z_limit;
  return res;
}

MomentResult moment_monitor(const EnsembleReport& report, double p) {
  MomentResult res;
  res.divergent = report.blowup_paths > 0;
  if (res.divergent) return res;
  res.finite = true;
  for (const auto& lr : report.levels) {
    double sm = 0.0, se = 0.0;
    for (double v : lr.sup_norm) sm += std::pow(v, p);
    for (double v : lr.sup_energy) se += v;
    const double n = static_cast<double>(std::max<std::size_t>(lr.sup_norm.size(), 1));
    res.sup_mass_moment.push_back(sm / n);
    res.sup_energy_moment.push_back(se / n);
    res.finite = res.finite && std::isfinite(sm) && std::isfinite(se);
  }
  res.stable = res.finite;
  auto rel = [](double a, double b) { return std::abs(b - a) / std::max(std::abs(a), 1e-300); };
  for (std::size_t l = 1; l < res.sup_mass_moment.size(); ++l) {
    if (rel(res.sup_mass_moment[l - 1], res.sup_mass_moment[l]) > 0.1) res.stable = false;
    if (rel(res.sup_energy_moment[l - 1], res.sup_energy_moment[l]) > 0.1) res.stable = false;
  }
  return res;
}

namespace {

Field terminal_state(const Field& x, const WienerPath& path, const ProblemSpec& spec,
                     ConvergenceConfig::Scheme scheme) {
  SolveOptions opt;
  opt.stride = path.steps();
  opt.detect_blowup = false;
  if (scheme == ConvergenceConfig::Scheme::direct) {
    Trajectory t = solve_direct(x, path, spec, opt);
    if (t.status.kind != StatusKind::finished) throw RegimeError("convergence run failed: " + t.status.reason);
    return *t.final_state;
  }
  Trajectory t = solve_rescaled(x, path, spec, opt);
  if (t.status.kind != StatusKind::finished) throw RegimeError("convergence run failed: " + t.status.reason);
  const Field W = spec.flags.noise ? eval_W(*spec.noise, path, path.steps())
                                   : Field(spec.noise->grid_ptr());
  return transform(*t.final_state, W, Direction::to_X);
}

}  // namespace

ConvergenceResult convergence_order(const Field& x, const ProblemSpec& spec,
                                    const ConvergenceConfig& config) {
  if (config.levels < 3) throw InvalidArgument("convergence needs at least 3 levels");
  if (config.paths < 1) throw InvalidArgument("convergence needs at least one path");
  spec.validate();
  const std::size_t L = config.levels;
  std::vector<std::vector<double>> err(config.paths, std::vector<double>(L - 1));
  parallel_for(config.paths, resolve_threads(config.threads), [&](std::size_t i) {
    std::vector<WienerPath> paths{sample_path(*spec.noise, spec.horizon, config.steps, config.seed, i)};
    for (std::size_t l = 1; l < L; ++l) paths.push_back(refine_path(paths.back()));
    const Field ref = terminal_state(x, paths.back(), spec, config.scheme);
    for (std::size_t l = 0; l + 1 < L; ++l)
      err[i][l] = lp_norm(terminal_state(x, paths[l], spec, config.scheme) - ref, 2.0);
  });
  ConvergenceResult res;
  for (std::size_t l = 0; l + 1 < L; ++l) {
    double s = 0.0;
    for (const auto& e : err) s += e[l];
    res.errors.push_back(s / static_cast<double>(config.paths));
    res.dt.push_back(spec.horizon / static_cast<double>(config.steps << l));
  }
  for (std::size_t l = 1; l < res.errors.size(); ++l)
    if (!(res.errors[l] < res.errors[l - 1])) res.inconclusive = true;
  res.order = fitted_order(res.errors);
  return res;
}

SchemeGapResult rescaling_gap(const Field& x, const ProblemSpec& spec, const EnsembleConfig& config) {
  if (config.paths < 1 || config.levels < 2) throw InvalidArgument("scheme gap needs paths and 2 levels");
  if (config.checkpoints == 0 || config.steps % config.checkpoints != 0)
    throw InvalidArgument("steps must be a positive multiple of checkpoints");
  spec.validate();
  const std::size_t L = config.levels;
  SchemeGapResult res;
  res.gaps.assign(config.paths, std::vector<double>(L));
  parallel_for(config.paths, resolve_threads(config.threads), [&](std::size_t i) {
    WienerPath path = sample_path(*spec.noise, spec.horizon, config.steps, config.seed, i);
    for (std::size_t l = 0; l < L; ++l) {
      if (l > 0) path = refine_path(path);
      SolveOptions opt;
      opt.stride = path.steps() / config.checkpoints;
      opt.detect_blowup = false;
      const Trajectory a = solve_direct(x, path, spec, opt);
      const Trajectory b = to_direct_variables(solve_rescaled(x, path, spec, opt), path, *spec.noise);
      if (a.status.kind != StatusKind::finished || b.status.kind != StatusKind::finished)
        throw RegimeError("scheme comparison run failed");
      double sup = 0.0;
      for (std::size_t k = 0; k < a.snapshots.size(); ++k)
        sup = std::max(sup, lp_norm(a.snapshots[k] - b.snapshots[k], 2.0));
      res.gaps[i][l] = sup;
    }
  });
  for (std::size_t l = 0; l < L; ++l) {
    res.dt.push_back(spec.horizon / static_cast<double>(config.steps << l));
    std::vector<double> col;
    for (const auto& g : res.gaps) col.push_back(g[l]);
    res.median_gap.push_back(median(col));
  }
  for (std::size_t l = 0; l + 1 < L; ++l) {
    std::vector<double> rates;
    for (const auto& g : res.gaps) rates.push_back(std::log2(g[l] / g[l + 1]));
    res.median_rate.push_back(median(rates));
  }
  return res;
}

ContinuityResult continuity_probe(const Field& x, const Field& direction,
                                  const std::vector<double>& deltas, const ProblemSpec& spec,
                                  const EnsembleConfig& config) {
  if (deltas.empty()) throw InvalidArgument("continuity probe needs perturbation sizes");
  for (double d : deltas)
    if (!(d > 0.0)) throw InvalidArgument("continuity probe perturbation sizes must be positive");
  const double vnorm = h1_norm(direction);
  if (!(vnorm > 0.0)) throw InvalidArgument("continuity probe direction must be nonzero");
  spec.validate();
  ContinuityResult res;
  res.deltas = deltas;
  res.ratios.assign(config.paths, std::vector<double>(deltas.size()));
  parallel_for(config.paths, resolve_threads(config.threads), [&](std::size_t i) {
    const WienerPath path = sample_path(*spec.noise, spec.horizon, config.steps, config.seed, i);
    SolveOptions opt;
    opt.stride = 1;
    opt.thresholds = config.thresholds;
    opt.detect_blowup = config.detect_blowup;
    auto run = [&](const Field& start) {
      Trajectory t = solve_direct(start, path, spec, opt);
      if (t.status.kind != StatusKind::finished)
        throw RegimeError("continuity probe run did not finish on path " + std::to_string(i) + ": " +
                          t.status.reason);
      return t;
    };
    const Trajectory base = run(x);
    for (std::size_t j = 0; j < deltas.size(); ++j) {
      const Trajectory pert = run(x + deltas[j] * direction);
      double sup = 0.0;
      for (std::size_t k = 0; k < base.snapshots.size(); ++k)
        sup = std::max(sup, h1_norm(pert.snapshots[k] - base.snapshots[k]));
      res.ratios[i][j] = sup / (deltas[j] * vnorm);
    }
  });
  res.bounded = true;
  for (const auto& row : res.ratios) {
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    const double s = *hi / *lo;
    res.spread.push_back(s);
    if (!(s <= 10.0)) res.bounded = false;
  }
  return res;
}

void write_csv(const EnsembleReport& report, std::ostream& out) {
  out << "level,t";
  for (std::size_t o = 0; o < kObservableCount; ++o) {
    const char* n = to_string(static_cast<Observable>(o));
    out << ',' << n << "_mean," << n << "_var," << n << "_se";
  }
  out << '\n' << std::setprecision(17);
  for (std::size_t l = 0; l < report.levels.size(); ++l)
    for (std::size_t k = 0; k < report.time.size(); ++k) {
      out << l << ',' << report.time[k];
      for (const auto& s : report.levels[l].stats)
        out << ',' << s.mean[k] << ',' << s.variance[k] << ',' << s.standard_error[k];
      out << '\n';
    }
}

}  // namespace snls
