#include <algorithm>
#include <cmath>

#include "diagnostics_util.hpp"
#include "snls/dynamics.hpp"
#include "snls/error.hpp"
#include "snls/kernels.hpp"

namespace snls {

void ProblemSpec::validate() const {
  if (!noise) throw InvalidArgument("problem has no noise model (use an empty one for N = 0)");
  if (!(alpha > 1.0)) throw InvalidArgument("alpha must exceed 1");
  if (lambda != 1 && lambda != -1) throw InvalidArgument("lambda must be +1 or -1");
  if (!(horizon > 0.0)) throw InvalidArgument("horizon T must be positive");
  if (classify(dim(), alpha, lambda).tag == RegimeTag::out_of_range)
    throw InvalidArgument("out-of-range regime for (d, alpha, lambda)");
}

void Diagnostics::reserve(std::size_t n) {
  time.reserve(n);
  mass.reserve(n);
  hamiltonian.reserve(n);
  h1.reserve(n);
  lp.reserve(n);
  spacetime.reserve(n);
}

Field nonlinearity(const Field& y, double alpha) {
  Field out(y.grid_ptr());
  AlignedVector<double> a2(y.size());
  kernels::abs2(a2, y.values());
  for (std::size_t i = 0; i < a2.size(); ++i) a2[i] = pow_from_abs2(a2[i], alpha - 1.0);
  std::copy(y.values().begin(), y.values().end(), out.values().begin());
  kernels::rmul(out.values(), a2);
  return out;
}

DirectStepper::DirectStepper(const ProblemSpec& spec, double dt)
    : spec_(&spec), dt_(dt), dispersion_(spec.grid().size(), cplx(1.0, 0.0)) {
  if (spec.flags.dispersion) {
    // i dX/dt = Delta X  =>  X_hat(k) -> exp(i |k|^2 dt) X_hat(k)
    const auto k2 = spec.grid().k_squared();
    for (std::size_t i = 0; i < k2.size(); ++i)
      dispersion_[i] = cplx(std::cos(k2[i] * dt), std::sin(k2[i] * dt));
  }
}

void DirectStepper::nonlinear_phase(Field& state, double tau) const {
  // i dX/dt = lambda |X|^(alpha-1) X keeps |X| fixed pointwise.
  const double q = spec_->alpha - 1.0;
  const double scale = -static_cast<double>(spec_->lambda) * tau;
  AlignedVector<double> a2(state.size());
  kernels::abs2(a2, state.values());
  AlignedVector<cplx> rot(state.size());
  for (std::size_t i = 0; i < a2.size(); ++i) {
    const double phase = scale * pow_from_abs2(a2[i], q);
    rot[i] = cplx(std::cos(phase), std::sin(phase));
  }
  kernels::cmul(state.values(), rot);
}

void DirectStepper::step(Field& state, const Field* dW) const {
  const StepFlags& f = spec_->flags;
  if (f.nonlinearity) nonlinear_phase(state, 0.5 * dt_);
  if (f.dispersion) {
    const Grid& g = state.grid();
    g.forward(state.values());
    kernels::cmul(state.values(), dispersion_);
    g.inverse(state.values());
  }
  if (f.noise && spec_->noise->mode_count() > 0) {
    if (!dW) throw InvalidArgument("noise substep needs the increment field dW");
    const Field factor = noise_factor(*spec_->noise, *dW, dt_, f.drop_mu_tilde);
    kernels::cmul(state.values(), factor.values());
  }
  if (f.nonlinearity) nonlinear_phase(state, 0.5 * dt_);
}

Field step_direct(const Field& state, std::size_t t_index, const WienerPath& path,
                  const ProblemSpec& spec) {
  if (t_index >= path.steps()) throw InvalidArgument("step index outside the path grid");
  state.require_finite("step_direct input");
  DirectStepper stepper(spec, path.dt());
  Field out = state;
  std::optional<Field> dW;
  if (spec.flags.noise && spec.noise->mode_count() > 0)
    dW = eval_dW(*spec.noise, path, t_index);
  stepper.step(out, dW ? &*dW : nullptr);
  out.require_finite("step_direct", path.time(t_index + 1));
  return out;
}

namespace {

double max_nonlinear_rate(const Field& u, double alpha) {
  double m = 0.0;
  for (const auto& v : u.values()) m = std::max(m, std::norm(v));
  return pow_from_abs2(m, alpha - 1.0);
}

}  // namespace

Trajectory solve_direct(const Field& x, const WienerPath& path, const ProblemSpec& spec,
                        const SolveOptions& options) {
  spec.validate();
  if (options.stride < 1) throw InvalidArgument("snapshot stride must be >= 1");
  x.require_finite("initial datum");
  const bool noisy = spec.flags.noise && spec.noise->mode_count() > 0;
  if (options.adaptive_dt && spec.noise->mode_count() > 0)
    throw InvalidArgument("adaptive time stepping is only available without noise modes");
  if (noisy && path.modes() != spec.noise->mode_count())
    throw InvalidArgument("path and noise model disagree on the number of modes");

  Trajectory traj;
  traj.stride = options.stride;
  traj.diagnostics.reserve(path.steps() + 1);
  detail::DiagnosticsRecorder recorder(spec);
  Field state = x;
  recorder.record(traj, 0.0, 0.0, state);
  detail::push_snapshot(traj, 0, 0.0, state);

  auto finish_step = [&](std::size_t step_no, double t, double dt) -> bool {
    if (!state.all_finite()) {
      traj.status = {StatusKind::numeric_failure, t, "non-finite state"};
      return false;
    }
    recorder.record(traj, t, dt, state);
    if (step_no % options.stride == 0) detail::push_snapshot(traj, step_no, t, state);
    if (options.detect_blowup) {
      Status s = detect_blowup(traj, spec, options.thresholds);
      if (s.kind != StatusKind::finished) {
        traj.status = std::move(s);
        return false;
      }
    }
    return true;
  };

  if (!options.adaptive_dt) {
    const DirectStepper stepper(spec, path.dt());
    for (std::size_t s = 0; s < path.steps(); ++s) {
      std::optional<Field> dW;
      if (noisy) dW = eval_dW(*spec.noise, path, s);
      stepper.step(state, dW ? &*dW : nullptr);
      if (!finish_step(s + 1, path.time(s + 1), path.dt())) break;
    }
  } else {
    const double base = path.dt();
    const double horizon = path.horizon();
    double t = 0.0;
    std::size_t step_no = 0;
    std::optional<DirectStepper> stepper;
    while (t < horizon) {
      double dt = base;
      if (spec.flags.nonlinearity) {
        const double rate = max_nonlinear_rate(state, spec.alpha);
        if (rate > 0.0) dt = std::min(dt, options.nonlinear_phase_cap / rate);
      }
      if (dt < options.min_dt) {
        traj.status = {StatusKind::blowup, t, "adaptive step underflow"};
        break;
      }
      if (t + dt > horizon * (1.0 - 1e-14)) dt = horizon - t;
      if (!stepper || stepper->dt() != dt) stepper.emplace(spec, dt);
      stepper->step(state, nullptr);
      t = (dt == horizon - t) ? horizon : t + dt;
      if (!finish_step(++step_no, t, dt)) break;
    }
  }

  traj.final_state = std::move(state);
  return traj;
}

}  // namespace snls
