#include "diagnostics_util.hpp"

#include <cmath>

#include "snls/functionals.hpp"

namespace snls::detail {

DiagnosticsRecorder::DiagnosticsRecorder(const ProblemSpec& spec) : spec_(&spec) {
  const int d = spec.dim();
  if (d >= 3) q1_ = 2.0 * (d + 2) / (d - 2);
}

void DiagnosticsRecorder::record(Trajectory& traj, double t, double dt, const Field& state) {
  Diagnostics& diag = traj.diagnostics;
  const double m = lp_power(state, 2.0);
  const double grad2 = gradient_norm_squared(state);
  const double lp = lp_power(state, spec_->alpha + 1.0);
  diag.time.push_back(t);
  diag.mass.push_back(m);
  diag.hamiltonian.push_back(0.5 * grad2 - spec_->lambda / (spec_->alpha + 1.0) * lp);
  diag.h1.push_back(std::sqrt(m) + std::sqrt(grad2));
  diag.lp.push_back(lp);
  if (q1_ > 0.0) {
    accumulated_ += previous_power_ * dt;
    previous_power_ = lp_power(state, q1_);
  }
  diag.spacetime.push_back(accumulated_);
}

void push_snapshot(Trajectory& traj, std::size_t step, double t, const Field& state) {
  traj.snapshot_steps.push_back(step);
  traj.snapshot_times.push_back(t);
  traj.snapshots.push_back(state);
}

}  // namespace snls::detail
