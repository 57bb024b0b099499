#pragma once

#include "snls/dynamics.hpp"

namespace snls::detail {

/// Appends one row of per-step diagnostics; keeps the running space-time
/// integral for d = 3.
class DiagnosticsRecorder {
 public:
  explicit DiagnosticsRecorder(const ProblemSpec& spec);
  /// dt is the length of the step that ended at t (0 for the initial row).
  void record(Trajectory& traj, double t, double dt, const Field& state);

 private:
  const ProblemSpec* spec_;
  double q1_ = 0.0;
  double previous_power_ = 0.0;
  double accumulated_ = 0.0;
};

void push_snapshot(Trajectory& traj, std::size_t step, double t, const Field& state);

}  // namespace snls::detail
