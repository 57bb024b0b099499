#include "snls/noise.hpp"

#include <cmath>

#include "snls/error.hpp"
#include "snls/kernels.hpp"
#include "snls/rng.hpp"

namespace snls {
namespace {

double axis_value(const std::vector<double>& v, std::size_t a) {
  return a < v.size() ? v[a] : 0.0;
}

}  // namespace

double evaluate_profile(const Profile& p, std::span<const double> xi) {
  return std::visit(
      [&](const auto& prof) -> double {
        using T = std::decay_t<decltype(prof)>;
        if constexpr (std::is_same_v<T, GaussianProfile>) {
          double r2 = 0.0;
          for (std::size_t a = 0; a < xi.size(); ++a) {
            const double dx = xi[a] - axis_value(prof.center, a);
            r2 += dx * dx;
          }
          return prof.height * std::exp(-r2 / (prof.width * prof.width));
        } else if constexpr (std::is_same_v<T, ConstantProfile>) {
          return prof.height;
        } else {
          double phase = 0.0;
          for (std::size_t a = 0; a < xi.size(); ++a) phase += axis_value(prof.wavevector, a) * xi[a];
          return prof.height * std::cos(phase);
        }
      },
      p);
}

NoiseModel::NoiseModel(std::vector<NoiseMode> modes, GridPtr grid)
    : modes_(std::move(modes)), grid_(std::move(grid)), mu_(grid_->size(), 0.0),
      mu_tilde_(grid_) {}

NoiseModel NoiseModel::build(std::vector<NoiseMode> modes, GridPtr grid) {
  NoiseModel m(std::move(modes), grid);
  const Grid& g = *grid;
  const int d = g.dim();
  std::array<double, 3> xi{};
  for (std::size_t j = 0; j < m.modes_.size(); ++j) {
    const NoiseMode& mode = m.modes_[j];
    AlignedVector<double> e(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (int a = 0; a < d; ++a) xi[a] = g.coordinate(a)[i];
      e[i] = evaluate_profile(mode.profile, std::span<const double>(xi.data(), d));
      if (!std::isfinite(e[i])) throw NumericFailure("noise profile is not finite on the grid");
    }
    Field phi(grid);
    // |mu_j|^2 and mu_j^2 written out so that Re mu_j = 0 gives exact cancellation.
    const double a = mode.mu.real(), b = mode.mu.imag();
    const double abs2 = a * a + b * b;
    const cplx sq(a * a - b * b, 2.0 * a * b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      phi[i] = cplx(a * e[i], b * e[i]);
      const double e2 = e[i] * e[i];
      m.mu_[i] += 0.5 * abs2 * e2;
      m.mu_tilde_[i] += cplx(0.5 * sq.real() * e2, 0.5 * sq.imag() * e2);
    }
    if (a != 0.0) m.conservative_ = false;
    m.e_.push_back(std::move(e));
    m.phi_.push_back(std::move(phi));
  }
  return m;
}

WienerPath::WienerPath(double horizon, std::size_t steps, std::size_t modes,
                       std::uint64_t seed, std::uint64_t path_id, int level,
                       std::vector<double> increments)
    : horizon_(horizon), steps_(steps), modes_(modes), seed_(seed), path_id_(path_id),
      level_(level) {
  if (!(horizon > 0.0)) throw InvalidArgument("path horizon must be positive");
  if (steps < 1) throw InvalidArgument("path needs at least one step");
  if (increments.size() != steps * modes)
    throw InvalidArgument("increment array has the wrong size");
  beta_.assign((steps + 1) * modes, 0.0);
  for (std::size_t s = 0; s < steps; ++s)
    for (std::size_t j = 0; j < modes; ++j)
      beta_[(s + 1) * modes + j] = beta_[s * modes + j] + increments[s * modes + j];
  increments_ = std::make_shared<const std::vector<double>>(std::move(increments));
}

double WienerPath::time(std::size_t index) const noexcept {
  return index == steps_ ? horizon_ : horizon_ * static_cast<double>(index) / steps_;
}

WienerPath sample_path(std::size_t modes, double horizon, std::size_t steps,
                       std::uint64_t seed, std::uint64_t path_id) {
  if (!(horizon > 0.0)) throw InvalidArgument("path horizon must be positive");
  if (steps < 1) throw InvalidArgument("path needs at least one step");
  const double sd = std::sqrt(horizon / static_cast<double>(steps));
  std::vector<double> inc(steps * modes);
  for (std::size_t s = 0; s < steps; ++s)
    for (std::size_t j = 0; j < modes; ++j)
      inc[s * modes + j] =
          sd * standard_normal({seed, path_id, static_cast<std::uint32_t>(j),
                                static_cast<std::uint32_t>(s), 0});
  return WienerPath(horizon, steps, modes, seed, path_id, 0, std::move(inc));
}

WienerPath sample_path(const NoiseModel& model, double horizon, std::size_t steps,
                       std::uint64_t seed, std::uint64_t path_id) {
  return sample_path(model.mode_count(), horizon, steps, seed, path_id);
}

WienerPath refine_path(const WienerPath& path) {
  const std::size_t n = path.modes();
  const std::size_t steps = path.steps();
  const double half_sd = 0.5 * std::sqrt(path.dt());
  const auto stream = static_cast<std::uint32_t>(path.level() + 1);
  std::vector<double> inc(2 * steps * n);
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t j = 0; j < n; ++j) {
      const double coarse = path.increment(s, j);
      const double z = standard_normal({path.seed(), path.path_id(),
                                        static_cast<std::uint32_t>(j),
                                        static_cast<std::uint32_t>(s), stream});
      const double first = 0.5 * coarse + half_sd * z;
      inc[(2 * s) * n + j] = first;
      inc[(2 * s + 1) * n + j] = coarse - first;
    }
  }
  return WienerPath(path.horizon(), 2 * steps, n, path.seed(), path.path_id(),
                    path.level() + 1, std::move(inc));
}

Field eval_W(const NoiseModel& model, const WienerPath& path, std::size_t t_index) {
  if (t_index > path.steps()) throw InvalidArgument("time index outside the path grid");
  if (path.modes() != model.mode_count())
    throw InvalidArgument("path and noise model disagree on the number of modes");
  Field w(model.grid_ptr());
  for (std::size_t j = 0; j < model.mode_count(); ++j)
    kernels::axpy(w.values(), cplx(path.beta(t_index, j), 0.0), model.phi(j).values());
  return w;
}

Field eval_dW(const NoiseModel& model, const WienerPath& path, std::size_t step) {
  if (step >= path.steps()) throw InvalidArgument("step outside the path grid");
  if (path.modes() != model.mode_count())
    throw InvalidArgument("path and noise model disagree on the number of modes");
  Field w(model.grid_ptr());
  for (std::size_t j = 0; j < model.mode_count(); ++j)
    kernels::axpy(w.values(), cplx(path.increment(step, j), 0.0), model.phi(j).values());
  return w;
}

Field noise_factor(const NoiseModel& model, const Field& dW, double dt, bool drop_mu_tilde) {
  Field f(model.grid_ptr());
  const auto mu = model.mu();
  const auto& mt = model.mu_tilde();
  for (std::size_t i = 0; i < f.size(); ++i) {
    cplx damping(mu[i], 0.0);
    if (!drop_mu_tilde) damping += mt[i];
    f[i] = std::exp(dW[i] - damping * dt);
  }
  return f;
}

}  // namespace snls
