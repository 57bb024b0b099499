#include <algorithm>
#include <cmath>

#include "snls/dynamics.hpp"
#include "snls/error.hpp"
#include "snls/kernels.hpp"

namespace snls {
namespace {

constexpr double kTolerance = 1e-10;
constexpr std::size_t kMaxIterations = 50;

struct WindowRun {
  std::vector<Field> y;
  std::vector<double> distances;
  std::vector<double> factors;
  bool converged = false;
  bool rejected = false;
};

// Linear propagator pieces for one window: U(t_k+1, t_k) and the weights
// e^((alpha-1) Re W(t_k)).
class WindowPropagator {
 public:
  WindowPropagator(const ProblemSpec& spec, const WienerPath& path, std::size_t steps)
      : noisy_(spec.flags.noise && spec.noise->mode_count() > 0) {
    const double dt = path.dt();
    const std::size_t count = noisy_ ? steps : 1;
    for (std::size_t k = 0; k < count; ++k) {
      steppers_.emplace_back(spec, dt, false);
      if (noisy_) steppers_.back().set_coefficients(eval_W(*spec.noise, path, k));
    }
    weights_.resize(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
      weights_[k].assign(spec.grid().size(), 1.0);
      if (!noisy_) continue;
      const Field W = eval_W(*spec.noise, path, k);
      for (std::size_t i = 0; i < W.size(); ++i)
        weights_[k][i] = std::exp((spec.alpha - 1.0) * W[i].real());
    }
  }

  void advance(Field& u, std::size_t k) const { steppers_[noisy_ ? k : 0].step(u); }
  std::span<const double> weight(std::size_t k) const { return weights_[k]; }

 private:
  bool noisy_;
  std::vector<RescaledStepper> steppers_;
  std::vector<AlignedVector<double>> weights_;
};

double l2_distance(const Field& a, const Field& b) {
  Field d = a;
  d -= b;
  return lp_norm(d, 2.0);
}

WindowRun run_window(const Field& x, const WienerPath& path, const ProblemSpec& spec,
                     std::size_t steps, bool stop_on_weak_contraction) {
  const WindowPropagator prop(spec, path, steps);
  const double dt = path.dt();
  const cplx minus_i_lambda(0.0, -static_cast<double>(spec.lambda));

  std::vector<Field> free;  // U(t_k, 0) x
  free.reserve(steps + 1);
  free.push_back(x);
  for (std::size_t k = 0; k < steps; ++k) {
    Field next = free.back();
    prop.advance(next, k);
    free.push_back(std::move(next));
  }

  WindowRun run;
  run.y = free;
  for (std::size_t it = 0; it < kMaxIterations; ++it) {
    std::vector<Field> forcing;
    forcing.reserve(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
      Field f = nonlinearity(run.y[k], spec.alpha);
      kernels::rmul(f.values(), prop.weight(k));
      forcing.push_back(std::move(f));
    }
    // Trapezoid Duhamel sum: I_{k+1} = U_k (I_k + dt/2 f_k) + dt/2 f_{k+1}.
    std::vector<Field> next;
    next.reserve(steps + 1);
    next.push_back(free[0]);
    Field integral(x.grid_ptr());
    for (std::size_t k = 0; k < steps; ++k) {
      kernels::axpy(integral.values(), cplx(0.5 * dt, 0.0), forcing[k].values());
      prop.advance(integral, k);
      kernels::axpy(integral.values(), cplx(0.5 * dt, 0.0), forcing[k + 1].values());
      Field yk = free[k + 1];
      kernels::axpy(yk.values(), minus_i_lambda, integral.values());
      next.push_back(std::move(yk));
    }
    double dist = 0.0;
    for (std::size_t k = 0; k <= steps; ++k) dist = std::max(dist, l2_distance(next[k], run.y[k]));
    if (!std::isfinite(dist)) throw NumericFailure("picard iterate is not finite");
    if (!run.distances.empty()) {
      const double prev = run.distances.back();
      run.factors.push_back(prev > 0.0 ? dist / prev : 0.0);
    }
    run.distances.push_back(dist);
    run.y = std::move(next);
    if (dist < kTolerance) {
      run.converged = true;
      break;
    }
    if (stop_on_weak_contraction && !run.factors.empty() && run.factors.back() > 0.5) {
      run.rejected = true;
      break;
    }
  }
  return run;
}

}  // namespace

PicardResult picard_solve(const Field& x, const WienerPath& path, const ProblemSpec& spec,
                          double window, WindowPolicy policy) {
  spec.validate();
  x.require_finite("picard initial datum");
  if (!(window > 0.0) || window > path.horizon() * (1.0 + 1e-12))
    throw InvalidArgument("picard window must lie in (0, T]");
  const double dt = path.dt();
  auto steps = static_cast<std::size_t>(std::llround(window / dt));
  steps = std::clamp<std::size_t>(steps, 1, path.steps());

  PicardDiagnostics diag;
  const bool adaptive = policy == WindowPolicy::adaptive;
  while (true) {
    const double length = static_cast<double>(steps) * dt;
    WindowRun run = run_window(x, path, spec, steps, adaptive);
    const double max_factor =
        run.factors.empty() ? 0.0 : *std::max_element(run.factors.begin(), run.factors.end());
    const bool accept = !adaptive || (run.converged && max_factor <= 0.5);
    diag.trace.push_back({length, run.distances.size(), max_factor, accept});
    if (accept) {
      diag.window = length;
      diag.iterations = run.distances.size();
      diag.distances = std::move(run.distances);
      diag.factors = std::move(run.factors);
      diag.max_factor = max_factor;
      diag.converged = run.converged;
      return {std::move(run.y.back()), std::move(diag)};
    }
    steps /= 2;
    if (steps < 4) throw NoContraction("picard window fell below 4 dt without contracting");
  }
}

}  // namespace snls
