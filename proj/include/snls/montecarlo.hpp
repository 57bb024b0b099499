#pragma once

// Path ensembles: counter-keyed Brownian paths run in parallel and folded in
// path order, so every statistic is bit-identical at any thread count.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "snls/dynamics.hpp"
#include "snls/noise.hpp"

namespace snls {

enum class Observable { mass = 0, hamiltonian = 1, h1 = 2, lp = 3 };
inline constexpr std::size_t kObservableCount = 4;
const char* to_string(Observable o) noexcept;

/// Width used when a caller asks for 0 threads: SNLS_THREADS if set and
/// positive, else the hardware concurrency. A positive request is still
/// capped by SNLS_THREADS.
std::size_t resolve_threads(std::size_t requested);

/// Runs body(i) for i in [0, count) on up to `width` threads. The first
/// exception thrown (lowest index) is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t width,
                  const std::function<void(std::size_t)>& body);

struct EnsembleConfig {
  std::size_t paths = 2;
  std::uint64_t seed = 0;
  /// Steps on [0, T] at level 0; level l uses steps * 2^l via refine_path.
  std::size_t steps = 100;
  std::size_t levels = 1;
  /// Output times t_k = k T / checkpoints, k = 0..checkpoints.
  std::size_t checkpoints = 10;
  std::size_t threads = 0;
  BlowupThresholds thresholds;
  bool detect_blowup = true;
};

struct ObservableStats {
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> standard_error;
  double ci_half_width(std::size_t k) const { return 3.0 * standard_error[k]; }
};

struct PathOutcome {
  std::uint64_t path_id = 0;
  /// Per level: status of the solve.
  std::vector<Status> status;
  bool blowup() const;
};

struct LevelReport {
  double dt = 0.0;
  std::size_t paths_used = 0;  // paths without blowup at every level
  std::array<ObservableStats, kObservableCount> stats;
  /// Paired difference (this level minus level 0) of each observable, over
  /// the same paths; empty at level 0.
  std::array<ObservableStats, kObservableCount> difference;
  /// E sup_t |X|_2 and E sup_t (|grad X|^2 + |X|_{alpha+1}^{alpha+1}) over
  /// used paths, plus per-path sup |X|_2 for moment computations.
  std::vector<double> sup_norm;
  std::vector<double> sup_energy;
};

struct EnsembleReport {
  std::vector<double> time;
  std::array<double, kObservableCount> initial{};
  std::vector<LevelReport> levels;
  std::vector<PathOutcome> outcomes;
  std::size_t blowup_paths = 0;
  const ObservableStats& stats(Observable o, std::size_t level = 0) const {
    return levels.at(level).stats[static_cast<std::size_t>(o)];
  }
};

/// Throws InvalidArgument if paths < 2, steps is not a multiple of
/// checkpoints, or levels == 0.
EnsembleReport run_ensemble(const Field& x, const ProblemSpec& spec, const EnsembleConfig& config);

struct MartingaleResult {
  bool passed = false;
  double max_z = 0.0;
  std::vector<double> z;
  std::vector<double> bias;  // discretisation allowance per checkpoint
};

/// z_k = max(0, |mean_k - initial| - b_k) / SE_k at every checkpoint k > 0,
/// where b_k = |paired level-1 minus level-0 mean| + 3 SE of that difference
/// (0 with a single level). Passes when every z_k <= z_limit.
MartingaleResult martingale_test(const EnsembleReport& report,
                                 Observable observable = Observable::mass,
                                 double z_limit = 3.0);

struct MomentResult {
  bool divergent = false;     // some path blew up
  std::vector<double> sup_mass_moment;    // E sup |X|_2^p, per level
  std::vector<double> sup_energy_moment;  // E sup (|grad X|^2 + |X|^(alpha+1)), per level
  bool finite = false;
  bool stable = false;        // relative change <= 10% between consecutive levels
};

MomentResult moment_monitor(const EnsembleReport& report, double p);

struct ConvergenceConfig {
  std::size_t paths = 8;
  std::uint64_t seed = 0;
  std::size_t steps = 50;  // level 0
  std::size_t levels = 4;  // L >= 3
  std::size_t threads = 0;
  enum class Scheme { direct, rescaled } scheme = Scheme::direct;
};

struct ConvergenceResult {
  std::vector<double> dt;      // levels 0..L-2
  std::vector<double> errors;  // E |X_l(T) - X_{L-1}(T)|_2
  double order = 0.0;          // minus the least-squares slope of log2 error vs level
  bool inconclusive = false;   // errors not strictly decreasing
};

ConvergenceResult convergence_order(const Field& x, const ProblemSpec& spec,
                                    const ConvergenceConfig& config);

/// Least-squares slope of log2(values) against index, negated.
double fitted_order(const std::vector<double>& values);

struct SchemeGapResult {
  std::vector<double> dt;                  // per level
  std::vector<std::vector<double>> gaps;   // [path][level] sup_t |X_direct - e^W y|_2
  std::vector<double> median_gap;          // per level
  std::vector<double> median_rate;         // per pair of levels: median log2(g_l / g_l+1)
};

/// Solves the same paths with both schemes; sup over checkpoints.
SchemeGapResult rescaling_gap(const Field& x, const ProblemSpec& spec, const EnsembleConfig& config);

struct ContinuityResult {
  std::vector<double> deltas;
  std::vector<std::vector<double>> ratios;  // [path][delta]
  std::vector<double> spread;               // per path: max / min over the ladder
  bool bounded = false;                     // every spread <= 10
};

/// sup_t |X(x + delta v) - X(x)|_{H^1} / (delta |v|_{H^1}) per path and delta,
/// on the shared paths of `config` (steps, paths, seed). Throws RegimeError if
/// any run blows up; zero deltas are rejected.
ContinuityResult continuity_probe(const Field& x, const Field& direction,
                                  const std::vector<double>& deltas, const ProblemSpec& spec,
                                  const EnsembleConfig& config);

/// Columns: level, t, then mean/var/se per observable.
void write_csv(const EnsembleReport& report, std::ostream& out);

double median(std::vector<double> values);

}  // namespace snls
