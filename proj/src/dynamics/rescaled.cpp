#include <cmath>

#include "diagnostics_util.hpp"
#include "snls/dynamics.hpp"
#include "snls/error.hpp"
#include "snls/kernels.hpp"

namespace snls {

RescaledCoefficients rescaled_coefficients(const NoiseModel& model, const Field& W,
                                           bool include_damping) {
  const Grid& g = W.grid();
  RescaledCoefficients out{{}, Field(W.grid_ptr())};
  const Field what = to_spectral(W);
  Field tmp(W.grid_ptr());
  for (int a = 0; a < g.dim(); ++a) {
    kernels::imul_real(tmp.values(), what.values(), g.k_axis(a));
    g.inverse(tmp.values());
    // c += (d_a W)^2
    for (std::size_t i = 0; i < tmp.size(); ++i) out.c[i] += tmp[i] * tmp[i];
    tmp *= 2.0;
    out.b.push_back(tmp);
  }
  Field lap = what;
  kernels::rmul(lap.values(), g.k_squared());
  g.inverse(lap.values());
  out.c -= lap;  // Delta W = -ifft(|k|^2 W_hat)
  if (include_damping) {
    const auto mu = model.mu();
    const Field& mt = model.mu_tilde();
    const cplx minus_i(0.0, -1.0);
    for (std::size_t i = 0; i < out.c.size(); ++i) out.c[i] += minus_i * (mu[i] + mt[i]);
  }
  return out;
}

RescaledCoefficients rescaled_coefficients(const NoiseModel& model, const WienerPath& path,
                                           std::size_t t_index) {
  return rescaled_coefficients(model, eval_W(model, path, t_index));
}

RescaledStepper::RescaledStepper(const ProblemSpec& spec, double dt, bool include_nonlinearity)
    : spec_(&spec), dt_(dt), nonlinear_(include_nonlinearity && spec.flags.nonlinearity) {
  if (spec.flags.dispersion && std::abs(dt) * spec.grid().max_k_squared() > kRk4CflBound)
    throw CflViolation("dt * max|k|^2 exceeds the RK4 stability bound " +
                       std::to_string(kRk4CflBound));
  set_coefficients(Field(spec.grid_ptr()));
}

void RescaledStepper::set_coefficients(const Field& W) {
  const bool noisy = spec_->flags.noise && spec_->noise->mode_count() > 0;
  weight_.assign(W.size(), 1.0);
  if (!noisy) {
    coeff_.reset();
    return;
  }
  coeff_.emplace(rescaled_coefficients(*spec_->noise, W, true));
  if (nonlinear_) {
    for (std::size_t i = 0; i < W.size(); ++i)
      weight_[i] = std::exp((spec_->alpha - 1.0) * W[i].real());
  }
}

Field RescaledStepper::rhs(const Field& y) const {
  const Grid& g = y.grid();
  const Field yhat = to_spectral(y);
  Field acc(y.grid_ptr());
  if (spec_->flags.dispersion) {
    std::copy(yhat.values().begin(), yhat.values().end(), acc.values().begin());
    kernels::rmul(acc.values(), g.k_squared());
    kernels::scale(acc.values(), -1.0);
    g.inverse(acc.values());
  }
  if (coeff_) {
    Field dy(y.grid_ptr());
    for (int a = 0; a < g.dim(); ++a) {
      kernels::imul_real(dy.values(), yhat.values(), g.k_axis(a));
      g.inverse(dy.values());
      kernels::cmul(dy.values(), coeff_->b[a].values());
      acc += dy;
    }
    Field cy = y;
    kernels::cmul(cy.values(), coeff_->c.values());
    acc += cy;
  }
  // -i * acc
  for (auto& v : acc.values()) v = cplx(v.imag(), -v.real());
  if (nonlinear_) {
    Field ny = nonlinearity(y, spec_->alpha);
    kernels::rmul(ny.values(), weight_);
    kernels::axpy(acc.values(), cplx(0.0, -static_cast<double>(spec_->lambda)), ny.values());
  }
  return acc;
}

void RescaledStepper::step(Field& y) const {
  const double h = dt_;
  const Field k1 = rhs(y);
  Field tmp = y;
  kernels::axpy(tmp.values(), cplx(0.5 * h, 0.0), k1.values());
  const Field k2 = rhs(tmp);
  tmp = y;
  kernels::axpy(tmp.values(), cplx(0.5 * h, 0.0), k2.values());
  const Field k3 = rhs(tmp);
  tmp = y;
  kernels::axpy(tmp.values(), cplx(h, 0.0), k3.values());
  const Field k4 = rhs(tmp);
  kernels::axpy(y.values(), cplx(h / 6.0, 0.0), k1.values());
  kernels::axpy(y.values(), cplx(h / 3.0, 0.0), k2.values());
  kernels::axpy(y.values(), cplx(h / 3.0, 0.0), k3.values());
  kernels::axpy(y.values(), cplx(h / 6.0, 0.0), k4.values());
}

namespace {

Field path_W(const ProblemSpec& spec, const WienerPath& path, std::size_t index) {
  if (spec.flags.noise && spec.noise->mode_count() > 0) return eval_W(*spec.noise, path, index);
  return Field(spec.grid_ptr());
}

}  // namespace

Field step_rescaled(const Field& y, std::size_t t_index, const WienerPath& path,
                    const ProblemSpec& spec) {
  if (t_index >= path.steps()) throw InvalidArgument("step index outside the path grid");
  y.require_finite("step_rescaled input");
  RescaledStepper stepper(spec, path.dt());
  stepper.set_coefficients(path_W(spec, path, t_index));
  Field out = y;
  stepper.step(out);
  out.require_finite("step_rescaled", path.time(t_index + 1));
  return out;
}

Field transform(const Field& u, const Field& W, Direction direction) {
  require_same_grid(u, W);
  Field out = u;
  const double sign = direction == Direction::to_X ? 1.0 : -1.0;
  AlignedVector<cplx> f(u.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(sign * W[i]);
  kernels::cmul(out.values(), f);
  return out;
}

Trajectory solve_rescaled(const Field& x, const WienerPath& path, const ProblemSpec& spec,
                          const SolveOptions& options) {
  spec.validate();
  if (options.stride < 1) throw InvalidArgument("snapshot stride must be >= 1");
  if (options.adaptive_dt) throw InvalidArgument("the rescaled solver runs on the path grid only");
  x.require_finite("initial datum");
  const bool noisy = spec.flags.noise && spec.noise->mode_count() > 0;
  if (noisy && path.modes() != spec.noise->mode_count())
    throw InvalidArgument("path and noise model disagree on the number of modes");

  Trajectory traj;
  traj.stride = options.stride;
  traj.diagnostics.reserve(path.steps() + 1);
  detail::DiagnosticsRecorder recorder(spec);
  RescaledStepper stepper(spec, path.dt());
  Field y = x;
  Field W = path_W(spec, path, 0);
  recorder.record(traj, 0.0, 0.0, transform(y, W, Direction::to_X));
  detail::push_snapshot(traj, 0, 0.0, y);

  for (std::size_t s = 0; s < path.steps(); ++s) {
    stepper.set_coefficients(W);
    stepper.step(y);
    const double t = path.time(s + 1);
    if (!y.all_finite()) {
      traj.status = {StatusKind::numeric_failure, t, "non-finite state"};
      break;
    }
    W = path_W(spec, path, s + 1);
    recorder.record(traj, t, path.dt(), transform(y, W, Direction::to_X));
    if ((s + 1) % options.stride == 0) detail::push_snapshot(traj, s + 1, t, y);
    if (options.detect_blowup) {
      Status st = detect_blowup(traj, spec, options.thresholds);
      if (st.kind != StatusKind::finished) {
        traj.status = std::move(st);
        break;
      }
    }
  }
  traj.final_state = std::move(y);
  return traj;
}

Trajectory to_direct_variables(const Trajectory& y_traj, const WienerPath& path,
                               const NoiseModel& model) {
  Trajectory out = y_traj;
  const bool noisy = model.mode_count() > 0;
  for (std::size_t i = 0; i < out.snapshots.size(); ++i) {
    if (!noisy) continue;
    const Field W = eval_W(model, path, out.snapshot_steps[i]);
    out.snapshots[i] = transform(out.snapshots[i], W, Direction::to_X);
  }
  if (out.final_state && noisy) {
    const Field W = eval_W(model, path, y_traj.steps_taken());
    out.final_state = transform(*out.final_state, W, Direction::to_X);
  }
  return out;
}

Field propagator_apply(const Field& u0, std::size_t s_index, std::size_t t_index,
                       const WienerPath& path, const ProblemSpec& spec) {
  if (s_index > t_index || t_index > path.steps())
    throw InvalidArgument("propagator needs s <= t on the path grid");
  RescaledStepper stepper(spec, path.dt(), false);
  Field u = u0;
  for (std::size_t s = s_index; s < t_index; ++s) {
    stepper.set_coefficients(path_W(spec, path, s));
    stepper.step(u);
  }
  u.require_finite("propagator_apply", path.time(t_index));
  return u;
}

}  // namespace snls
