#include <cmath>

#include "snls/dynamics.hpp"

namespace snls {

Status detect_blowup(const Trajectory& trajectory, const ProblemSpec& spec,
                     const BlowupThresholds& thresholds) {
  const Diagnostics& d = trajectory.diagnostics;
  if (d.time.empty()) return {};
  const double t = d.time.back();

  const double h1_cap = thresholds.h1_factor * d.h1.front();
  if (d.h1.back() > h1_cap && d.h1.front() > 0.0)
    return {StatusKind::blowup, t, "h1"};

  if (classify(spec.dim(), spec.alpha, spec.lambda).tag == RegimeTag::energy_critical &&
      d.spacetime.size() >= 2) {
    // Reference: the accumulator value at T if |X|_{q1} stayed at its initial size.
    const double dt0 = d.time[1] - d.time[0];
    const double initial_rate = dt0 > 0.0 ? d.spacetime[1] / dt0 : 0.0;
    const double cap = thresholds.spacetime_factor * spec.horizon * initial_rate;
    if (initial_rate > 0.0 && d.spacetime.back() > cap)
      return {StatusKind::blowup, t, "spacetime"};
  }
  return {};
}

}  // namespace snls
