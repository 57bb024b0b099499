#include "snls/identities.hpp"

#include <cmath>
#include <iomanip>

#include "snls/error.hpp"
#include "snls/functionals.hpp"
#include "snls/kernels.hpp"

namespace snls {
namespace {

void require_dense(const Trajectory& traj, const WienerPath& path) {
  if (traj.stride != 1) throw InvalidArgument("identity checks need snapshot stride 1");
  if (traj.snapshots.empty() || traj.snapshots.size() > path.steps() + 1)
    throw InvalidArgument("trajectory does not live on the path grid");
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i)
    if (traj.snapshot_steps[i] != i)
      throw InvalidArgument("trajectory snapshots are not one per path step");
}

// <grad f, grad g> = h^d / n^d sum |k|^2 f_hat conj(g_hat)
cplx grad_inner(const Field& fhat, const Field& ghat) {
  const Grid& g = fhat.grid();
  Field w = fhat;
  kernels::rmul(w.values(), g.k_squared());
  return g.cell_volume() / static_cast<double>(g.size()) * kernels::cdot(w.values(), ghat.values());
}

Field pointwise_real(const Field& u, std::span<const double> r) {
  Field out = u;
  kernels::rmul(out.values(), r);
  return out;
}

Field pointwise(const Field& u, const Field& v) {
  Field out = u;
  kernels::cmul(out.values(), v.values());
  return out;
}

AlignedVector<double> abs_power(const Field& u, double p) {
  AlignedVector<double> a(u.size());
  kernels::abs2(a, u.values());
  for (auto& v : a) v = pow_from_abs2(v, p);
  return a;
}

double weighted_sum(std::span<const double> w, std::span<const double> a, double cell) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * a[i];
  return cell * s;
}

// Accumulates the term series and the residual once per-step increments are known.
class Accumulator {
 public:
  Accumulator(IdentityReport& report, std::vector<std::string> names, double lhs0)
      : report_(&report), lhs0_(lhs0), running_(names.size(), 0.0) {
    report.term_names = std::move(names);
    report.terms.assign(report.term_names.size(), {0.0});
    report.residual.push_back(0.0);
  }

  void add(std::size_t term, double contribution) { running_[term] += contribution; }

  void close_step(double lhs) {
    double sum = 0.0;
    for (std::size_t i = 0; i < running_.size(); ++i) {
      report_->terms[i].push_back(running_[i]);
      sum += running_[i];
    }
    report_->residual.push_back((lhs - lhs0_) - sum);
  }

 private:
  IdentityReport* report_;
  double lhs0_;
  std::vector<double> running_;
};

IdentityReport start(const char* name, const Trajectory& traj, const WienerPath& path) {
  require_dense(traj, path);
  IdentityReport r;
  r.name = name;
  r.dt = path.dt();
  r.time.assign(traj.snapshot_times.begin(), traj.snapshot_times.end());
  r.increments = path.increments();
  return r;
}

std::size_t noise_modes(const ProblemSpec& spec) {
  return spec.flags.noise ? spec.noise->mode_count() : 0;
}

}  // namespace

const std::vector<double>& IdentityReport::term(const std::string& term_name) const {
  for (std::size_t i = 0; i < term_names.size(); ++i)
    if (term_names[i] == term_name) return terms[i];
  throw InvalidArgument("unknown identity term: " + term_name);
}

IdentityReport mass_identity(const Trajectory& traj, const WienerPath& path,
                             const NoiseModel& model) {
  IdentityReport r = start("mass", traj, path);
  const auto& snaps = traj.snapshots;
  Accumulator acc(r, {"martingale"}, mass(snaps[0]));
  const double cell = model.grid_ptr()->cell_volume();
  for (std::size_t i = 0; i + 1 < snaps.size(); ++i) {
    AlignedVector<double> a2(snaps[i].size());
    kernels::abs2(a2, snaps[i].values());
    for (std::size_t j = 0; j < model.mode_count(); ++j) {
      const double re_mu = model.modes()[j].mu.real();
      if (re_mu == 0.0) continue;
      const double pairing = weighted_sum(model.e(j), a2, cell);  // <X, X e_j>
      acc.add(0, 2.0 * re_mu * pairing * path.increment(i, j));
    }
    acc.close_step(mass(snaps[i + 1]));
  }
  return r;
}

IdentityReport hamiltonian_identity(const Trajectory& traj, const WienerPath& path,
                                    const ProblemSpec& spec) {
  IdentityReport r = start("hamiltonian", traj, path);
  const auto& snaps = traj.snapshots;
  const NoiseModel& model = *spec.noise;
  const double p = spec.alpha + 1.0;
  const double lambda = spec.lambda;
  const double cell = spec.grid().cell_volume();
  const double dt = path.dt();
  const std::size_t modes = noise_modes(spec);
  Accumulator acc(r,
                  {"mu_drift", "ito_correction", "nonlinear_drift", "gradient_martingale",
                   "potential_martingale"},
                  hamiltonian(snaps[0], spec.alpha, spec.lambda));
  for (std::size_t i = 0; i + 1 < snaps.size(); ++i) {
    const Field& X = snaps[i];
    const Field Xhat = to_spectral(X);
    const AlignedVector<double> xp = abs_power(X, p);
    if (modes > 0) {
      const Field muXhat = to_spectral(pointwise_real(X, model.mu()));
      acc.add(0, -grad_inner(muXhat, Xhat).real() * dt);
    }
    for (std::size_t j = 0; j < modes; ++j) {
      const Field& phi = model.phi(j);
      const Field phiXhat = to_spectral(pointwise(X, phi));
      acc.add(1, 0.5 * grad_inner(phiXhat, phiXhat).real() * dt);
      AlignedVector<double> re_phi(phi.size()), re_phi2(phi.size());
      for (std::size_t k = 0; k < phi.size(); ++k) {
        re_phi[k] = phi[k].real();
        re_phi2[k] = re_phi[k] * re_phi[k];
      }
      acc.add(2, -0.5 * lambda * (spec.alpha - 1.0) * weighted_sum(re_phi2, xp, cell) * dt);
      const double db = path.increment(i, j);
      acc.add(3, grad_inner(phiXhat, Xhat).real() * db);
      acc.add(4, -lambda * weighted_sum(re_phi, xp, cell) * db);
    }
    acc.close_step(hamiltonian(snaps[i + 1], spec.alpha, spec.lambda));
  }
  return r;
}

IdentityReport lp_identity(const Trajectory& traj, const WienerPath& path,
                           const ProblemSpec& spec) {
  IdentityReport r = start("lp", traj, path);
  const auto& snaps = traj.snapshots;
  const NoiseModel& model = *spec.noise;
  const double p = spec.alpha + 1.0;
  const double cell = spec.grid().cell_volume();
  const double dt = path.dt();
  const std::size_t modes = noise_modes(spec);
  const int d = spec.dim();
  Accumulator acc(r, {"dispersive_drift", "ito_correction", "martingale"}, lp_power(snaps[0], p));
  for (std::size_t i = 0; i + 1 < snaps.size(); ++i) {
    const Field& X = snaps[i];
    const auto grad = gradient(X);
    AlignedVector<double> a2(X.size());
    kernels::abs2(a2, X.values());
    // Re int i grad g . grad conj(X) = -Im int grad g . grad conj(X)
    double im_sum = 0.0;
    for (std::size_t k = 0; k < X.size(); ++k) {
      const double w_conj = 0.5 * (p - 2.0) * pow_from_abs2(a2[k], p - 4.0);
      const double w_plain = 0.5 * p * pow_from_abs2(a2[k], p - 2.0);
      const cplx x2 = X[k] * X[k];
      for (int a = 0; a < d; ++a) {
        const cplx gx = grad[a][k];
        const cplx grad_g = w_conj * x2 * std::conj(gx) + w_plain * gx;
        im_sum += (grad_g * std::conj(gx)).imag();
      }
    }
    acc.add(0, p * cell * im_sum * dt);
    const AlignedVector<double> xp = abs_power(X, p);
    for (std::size_t j = 0; j < modes; ++j) {
      const Field& phi = model.phi(j);
      AlignedVector<double> re_phi(phi.size()), re_phi2(phi.size());
      for (std::size_t k = 0; k < phi.size(); ++k) {
        re_phi[k] = phi[k].real();
        re_phi2[k] = re_phi[k] * re_phi[k];
      }
      acc.add(1, 0.5 * p * (p - 2.0) * weighted_sum(re_phi2, xp, cell) * dt);
      acc.add(2, p * weighted_sum(re_phi, xp, cell) * path.increment(i, j));
    }
    acc.close_step(lp_power(snaps[i + 1], p));
  }
  return r;
}

IdentityReport h1_identity(const Trajectory& traj, const WienerPath& path,
                           const ProblemSpec& spec, std::optional<double> cutoff) {
  IdentityReport r = start("h1", traj, path);
  const auto& snaps = traj.snapshots;
  const NoiseModel& model = *spec.noise;
  const double lambda = spec.lambda;
  const double dt = path.dt();
  const std::size_t modes = noise_modes(spec);
  Accumulator acc(r,
                  {"mu_drift", "ito_correction", "nonlinear_drift", "gradient_martingale"},
                  gradient_norm_squared(snaps[0]));
  for (std::size_t i = 0; i + 1 < snaps.size(); ++i) {
    const Field& X = snaps[i];
    const Field Xhat = to_spectral(X);
    if (spec.flags.nonlinearity) {
      Field g = nonlinearity(X, spec.alpha);
      if (cutoff) g = theta_m(g, *cutoff);
      // -2 lambda Re int i grad g_m . grad conj(X) = 2 lambda Im <grad g_m, grad X>
      acc.add(2, 2.0 * lambda * grad_inner(to_spectral(g), Xhat).imag() * dt);
    }
    if (modes > 0) {
      const Field muXhat = to_spectral(pointwise_real(X, model.mu()));
      acc.add(0, -2.0 * grad_inner(muXhat, Xhat).real() * dt);
    }
    for (std::size_t j = 0; j < modes; ++j) {
      const Field phiXhat = to_spectral(pointwise(X, model.phi(j)));
      acc.add(1, grad_inner(phiXhat, phiXhat).real() * dt);
      acc.add(3, 2.0 * grad_inner(phiXhat, Xhat).real() * path.increment(i, j));
    }
    acc.close_step(gradient_norm_squared(snaps[i + 1]));
  }
  return r;
}

void write_csv(const IdentityReport& report, std::ostream& out) {
  out << "t,residual";
  for (const auto& n : report.term_names) out << ',' << n;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < report.time.size(); ++i) {
    out << report.time[i] << ',' << report.residual[i];
    for (const auto& t : report.terms) out << ',' << t[i];
    out << '\n';
  }
}

}  // namespace snls
