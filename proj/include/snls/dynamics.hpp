#pragma once

// Time integration of
//
//   i dX = Delta X dt + lambda |X|^(alpha-1) X dt - i mu X dt + i X dW
//
// directly (Strang splitting with an exact noise factor) and through the
// rescaling X = e^W y, which turns it into the pathwise equation
//
//   dy/dt = -i (Delta + b.grad + c) y - lambda i e^((alpha-1) Re W) |y|^(alpha-1) y,
//   b = 2 grad W,  c = sum_a (d_a W)^2 + Delta W - i (mu + mu_tilde),
//
// stepped with classical RK4. Also: the Picard iteration on the mild form of
// the rescaled equation, and blowup monitoring.
//
// Noise substep. Over one step, dX = X dW - mu X dt at fixed xi is a scalar
// linear Ito SDE whose solution is X exp(dW - mu dt - 1/2 d[W,W]). Since
// W = sum phi_j beta_j with independent real beta_j,
// d[W,W] = sum phi_j^2 dt = 2 mu_tilde dt, so the exact factor is
// exp(dW - (mu + mu_tilde) dt). For Re mu_j = 0, dW is imaginary and
// mu + mu_tilde = 0, so the factor has modulus one.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "snls/noise.hpp"
#include "snls/regime.hpp"
#include "snls/spectral.hpp"

namespace snls {

/// Switches for isolating substeps in tests and diagnostics runs.
struct StepFlags {
  bool dispersion = true;
  bool nonlinearity = true;
  bool noise = true;
  /// Injected bug: noise factor exp(dW - mu dt) without mu_tilde.
  bool drop_mu_tilde = false;
  bool operator==(const StepFlags&) const = default;
};

struct ProblemSpec {
  double alpha = 3.0;
  int lambda = 1;
  double horizon = 1.0;
  std::shared_ptr<const NoiseModel> noise;
  StepFlags flags;

  const Grid& grid() const { return *noise->grid_ptr(); }
  const GridPtr& grid_ptr() const { return noise->grid_ptr(); }
  int dim() const { return grid().dim(); }
  /// Throws InvalidArgument for alpha <= 1, |lambda| != 1, horizon <= 0 or an
  /// out-of-range regime.
  void validate() const;
};

/// RK4 is stable on the imaginary axis up to 2 sqrt 2; 2.8 with a 10% margin.
inline constexpr double kRk4CflBound = 2.8 * 0.9;

struct BlowupThresholds {
  /// Blowup when |X|_{H^1} exceeds h1_factor x its initial value.
  double h1_factor = 1e6;
  /// Energy-critical only: blowup when int_0^t |X|_{q1}^{q1} ds exceeds
  /// spacetime_factor x T |x|_{q1}^{q1}, q1 = 2(d+2)/(d-2).
  double spacetime_factor = 1e6;
};

enum class StatusKind { finished, blowup, numeric_failure };

struct Status {
  StatusKind kind = StatusKind::finished;
  double time = 0.0;
  std::string reason;
};

/// Per-step diagnostics (always dense, independent of the snapshot stride).
struct Diagnostics {
  std::vector<double> time;
  std::vector<double> mass;
  std::vector<double> hamiltonian;
  std::vector<double> h1;
  std::vector<double> lp;         // |X|_{alpha+1}^{alpha+1}
  std::vector<double> spacetime;  // left-Riemann int_0^t |X|_{q1}^{q1} ds (d = 3 only, else 0)
  void reserve(std::size_t n);
};

struct Trajectory {
  std::size_t stride = 1;
  std::vector<std::size_t> snapshot_steps;
  std::vector<double> snapshot_times;
  std::vector<Field> snapshots;
  Diagnostics diagnostics;
  Status status;
  /// Last state reached (at diagnostics.time.back()).
  std::optional<Field> final_state;
  std::size_t steps_taken() const { return diagnostics.time.empty() ? 0 : diagnostics.time.size() - 1; }
};

struct SolveOptions {
  std::size_t stride = 1;
  BlowupThresholds thresholds;
  bool detect_blowup = true;
  /// Deterministic runs only (no noise modes): shrink dt so that
  /// max|X|^(alpha-1) dt <= nonlinear_phase_cap, never above the path step.
  bool adaptive_dt = false;
  double nonlinear_phase_cap = 0.02;
  /// Smallest step allowed by the adaptive controller.
  double min_dt = 1e-12;
};

/// Pointwise |y|^(alpha-1) y, zero where |y| < 1e-150.
Field nonlinearity(const Field& y, double alpha);

/// One Strang step of the direct equation. Precomputes the dispersive
/// multiplier for a fixed dt.
class DirectStepper {
 public:
  DirectStepper(const ProblemSpec& spec, double dt);
  /// dW may be null when the model has no modes or noise is disabled.
  void step(Field& state, const Field* dW) const;
  double dt() const noexcept { return dt_; }

 private:
  void nonlinear_phase(Field& state, double tau) const;

  const ProblemSpec* spec_;
  double dt_;
  AlignedVector<cplx> dispersion_;
};

Field step_direct(const Field& state, std::size_t t_index, const WienerPath& path,
                  const ProblemSpec& spec);
Trajectory solve_direct(const Field& x, const WienerPath& path, const ProblemSpec& spec,
                        const SolveOptions& options = {});

struct RescaledCoefficients {
  std::vector<Field> b;  // 2 grad W
  Field c;               // sum (d_a W)^2 + Delta W - i (mu + mu_tilde)
};

RescaledCoefficients rescaled_coefficients(const NoiseModel& model, const WienerPath& path,
                                           std::size_t t_index);
/// Same, from an already evaluated W.
RescaledCoefficients rescaled_coefficients(const NoiseModel& model, const Field& W,
                                           bool include_damping = true);

/// RK4 for the rescaled equation with coefficients frozen at the left end of
/// the step.
class RescaledStepper {
 public:
  /// Throws CflViolation when dt max|k|^2 > kRk4CflBound (dispersion on).
  RescaledStepper(const ProblemSpec& spec, double dt, bool include_nonlinearity = true);
  void set_coefficients(const Field& W);
  void step(Field& y) const;
  double dt() const noexcept { return dt_; }

 private:
  Field rhs(const Field& y) const;

  const ProblemSpec* spec_;
  double dt_;
  bool nonlinear_;
  std::optional<RescaledCoefficients> coeff_;
  AlignedVector<double> weight_;  // e^((alpha-1) Re W)
};

Field step_rescaled(const Field& y, std::size_t t_index, const WienerPath& path,
                    const ProblemSpec& spec);

enum class Direction { to_X, to_y };
/// Multiply by e^W (to_X) or e^-W (to_y).
Field transform(const Field& u, const Field& W, Direction direction);

/// Snapshots hold y; diagnostics are evaluated on X = e^W y.
Trajectory solve_rescaled(const Field& x, const WienerPath& path, const ProblemSpec& spec,
                          const SolveOptions& options = {});
/// Companion X-trajectory: every snapshot mapped through e^W.
Trajectory to_direct_variables(const Trajectory& y_traj, const WienerPath& path,
                               const NoiseModel& model);

/// U(t, s) u0: integrate du/dt = A(t) u from t_s to t_t with the rescaled
/// stepper and the nonlinearity off.
Field propagator_apply(const Field& u0, std::size_t s_index, std::size_t t_index,
                       const WienerPath& path, const ProblemSpec& spec);

enum class WindowPolicy { fixed, adaptive };

struct WindowAttempt {
  double length;
  std::size_t iterations;
  double max_factor;
  bool accepted;
};

struct PicardDiagnostics {
  double window = 0.0;
  std::size_t iterations = 0;
  /// sup_t |y^(k+1) - y^(k)|_2 for k = 0, 1, ...
  std::vector<double> distances;
  /// distances[k+1] / distances[k]
  std::vector<double> factors;
  double max_factor = 0.0;
  bool converged = false;
  std::vector<WindowAttempt> trace;
};

struct PicardResult {
  Field state;  // y at the window end
  PicardDiagnostics diagnostics;
};

/// Fixed-point iteration y <- U(.,0)x - lambda i int_0^t U(t,s) e^((alpha-1)Re W) g(y(s)) ds
/// on [0, window] (trapezoid rule in s). Stops when the sup-in-time L2 change
/// drops below 1e-10 or after 50 iterations. The adaptive policy halves the
/// window whenever a measured contraction factor exceeds 1/2 and throws
/// NoContraction once the window is shorter than 4 dt.
PicardResult picard_solve(const Field& x, const WienerPath& path, const ProblemSpec& spec,
                          double window, WindowPolicy policy = WindowPolicy::adaptive);

/// Inspects the latest diagnostics entry. Subcritical regimes watch the H^1
/// norm; the energy-critical regime also watches the space-time accumulator.
Status detect_blowup(const Trajectory& trajectory, const ProblemSpec& spec,
                     const BlowupThresholds& thresholds);

}  // namespace snls
