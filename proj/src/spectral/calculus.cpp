#include <algorithm>
#include <cmath>
#include <limits>

#include "snls/error.hpp"
#include "snls/kernels.hpp"
#include "snls/spectral.hpp"

namespace snls {

Field to_spectral(const Field& u) {
  Field out = u;
  u.grid().forward(out.values());
  return out;
}

Field from_spectral(const Field& uhat) {
  Field out = uhat;
  uhat.grid().inverse(out.values());
  return out;
}

std::vector<Field> gradient(const Field& u) {
  const Grid& g = u.grid();
  const Field uhat = to_spectral(u);
  std::vector<Field> out;
  out.reserve(g.dim());
  for (int a = 0; a < g.dim(); ++a) {
    Field da(u.grid_ptr());
    kernels::imul_real(da.values(), uhat.values(), g.k_axis(a));
    g.inverse(da.values());
    da.require_finite("gradient");
    out.push_back(std::move(da));
  }
  return out;
}

Field laplacian(const Field& u) {
  const Grid& g = u.grid();
  Field out = to_spectral(u);
  kernels::rmul(out.values(), g.k_squared());
  kernels::scale(out.values(), -1.0);
  g.inverse(out.values());
  out.require_finite("laplacian");
  return out;
}

Field divergence(std::span<const Field> components) {
  if (components.empty()) throw InvalidArgument("divergence of an empty vector field");
  const Grid& g = components[0].grid();
  if (static_cast<int>(components.size()) != g.dim())
    throw InvalidArgument("divergence needs one component per axis");
  Field acc(components[0].grid_ptr());
  Field tmp(components[0].grid_ptr());
  for (int a = 0; a < g.dim(); ++a) {
    require_same_grid(components[0], components[a]);
    Field chat = to_spectral(components[a]);
    kernels::imul_real(tmp.values(), chat.values(), g.k_axis(a));
    kernels::axpy(acc.values(), cplx(1.0, 0.0), tmp.values());
  }
  g.inverse(acc.values());
  return acc;
}

cplx inner_product(const Field& u, const Field& v) {
  require_same_grid(u, v);
  return u.grid().cell_volume() * kernels::cdot(u.values(), v.values());
}

cplx inner_product_spectral(const Field& u, const Field& v) {
  require_same_grid(u, v);
  const Field uh = to_spectral(u);
  const Field vh = to_spectral(v);
  const Grid& g = u.grid();
  return (g.cell_volume() / static_cast<double>(g.size())) *
         kernels::cdot(uh.values(), vh.values());
}

double pow_from_abs2(double abs2, double q) noexcept {
  if (q == 2.0) return abs2;
  if (q == 4.0) return abs2 * abs2;
  if (q == 6.0) return abs2 * abs2 * abs2;
  if (abs2 < 1e-300) return q == 0.0 ? 1.0 : 0.0;
  return std::exp(0.5 * q * std::log(abs2));
}

double lp_power(const Field& u, double p) {
  if (!(p >= 1.0) || std::isinf(p)) throw InvalidArgument("lp_power needs finite p >= 1");
  if (p == 2.0) return u.grid().cell_volume() * kernels::sum_abs2(u.values());
  AlignedVector<double> a2(u.size());
  kernels::abs2(a2, u.values());
  double s = 0.0;
  for (double v : a2) s += pow_from_abs2(v, p);
  return u.grid().cell_volume() * s;
}

double lp_norm(const Field& u, double p) {
  if (std::isnan(p) || p < 1.0) throw InvalidArgument("lp_norm needs p >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& v : u.values()) m = std::max(m, std::abs(v));
    return m;
  }
  const double s = lp_power(u, p);
  return p == 2.0 ? std::sqrt(s) : std::pow(s, 1.0 / p);
}

double gradient_norm_squared(const Field& u) {
  const Grid& g = u.grid();
  const Field uhat = to_spectral(u);
  AlignedVector<double> a2(u.size());
  kernels::abs2(a2, uhat.values());
  const auto k2 = g.k_squared();
  double s = 0.0;
  for (std::size_t i = 0; i < a2.size(); ++i) s += k2[i] * a2[i];
  return g.cell_volume() / static_cast<double>(g.size()) * s;
}

double h1_norm(const Field& u) {
  return lp_norm(u, 2.0) + std::sqrt(gradient_norm_squared(u));
}

double boundary_ratio(const Field& u) {
  const Grid& g = u.grid();
  const auto n = static_cast<std::size_t>(g.n());
  double edge = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double a = std::abs(u[i]);
    peak = std::max(peak, a);
    bool on_face = false;
    for (std::size_t rem = i, a_idx = 0; a_idx < static_cast<std::size_t>(g.dim()); ++a_idx, rem /= n)
      on_face = on_face || rem % n == 0;
    if (on_face) edge = std::max(edge, a);
  }
  return peak > 0.0 ? edge / peak : 0.0;
}

double theta_bump(double r) noexcept {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  // psi(s) = exp(-1/s) glued as psi(2-r) / (psi(2-r) + psi(r-1)).
  const double a = std::exp(-1.0 / (2.0 - r));
  const double b = std::exp(-1.0 / (r - 1.0));
  return a / (a + b);
}

Field theta_m(const Field& u, double m) {
  if (!(m > 0.0)) throw InvalidArgument("theta_m needs m > 0");
  const Grid& g = u.grid();
  Field out = to_spectral(u);
  const auto k2 = g.k_squared();
  AlignedVector<double> mult(g.size());
  for (std::size_t i = 0; i < mult.size(); ++i) mult[i] = theta_bump(std::sqrt(k2[i]) / m);
  kernels::rmul(out.values(), mult);
  g.inverse(out.values());
  return out;
}

}  // namespace snls
