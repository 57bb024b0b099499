#include "snls/functionals.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "snls/error.hpp"
#include "snls/regime.hpp"
#include "snls/rng.hpp"

namespace snls {

double mass(const Field& u) { return lp_power(u, 2.0); }

double hamiltonian(const Field& u, double alpha, int lambda) {
  if (classify(u.grid().dim(), alpha, lambda).tag == RegimeTag::out_of_range)
    throw InvalidArgument("hamiltonian: alpha outside the admitted range");
  return 0.5 * gradient_norm_squared(u) - lambda / (alpha + 1.0) * lp_power(u, alpha + 1.0);
}

double gn_theta(int d, double alpha) noexcept {
  return d * (alpha - 1.0) / (2.0 * (alpha + 1.0));
}

Field random_band_limited_field(GridPtr grid, std::uint64_t seed, std::uint64_t index) {
  constexpr int kBand = 6;
  const Grid& g = *grid;
  const int n = g.n();
  Field uhat(grid);
  std::uint32_t draw = 0;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    std::size_t rem = idx;
    int r2 = 0;
    bool inside = true;
    for (int a = g.dim() - 1; a >= 0; --a) {
      int i = static_cast<int>(rem % n);
      rem /= n;
      if (i >= n / 2) i -= n;
      if (std::abs(i) > kBand) inside = false;
      r2 += i * i;
    }
    if (!inside || r2 == 0 || r2 > kBand * kBand) continue;
    const double amp = 1.0 / (1.0 + r2);
    const double re = standard_normal({seed, index, 0, draw, 7});
    const double im = standard_normal({seed, index, 1, draw, 7});
    ++draw;
    uhat[idx] = amp * static_cast<double>(g.size()) * cplx(re, im);
  }
  return from_spectral(uhat);
}

double gn_constant(int d, double alpha) {
  static std::mutex mutex;
  static std::map<std::pair<int, double>, double> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find({d, alpha}); it != cache.end()) return it->second;

  const int n = d == 1 ? 128 : (d == 2 ? 32 : 16);
  const auto grid = Grid::make(d, n, 2.0 * M_PI);
  const double theta = gn_theta(d, alpha);
  const double beta = (1.0 - theta) * (alpha + 1.0);
  const double gamma = theta * (alpha + 1.0);
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const Field u = random_band_limited_field(grid, 0x6e5c0ffeeULL, i);
    const double lhs = lp_power(u, alpha + 1.0);
    const double l2 = lp_norm(u, 2.0);
    const double grad = std::sqrt(gradient_norm_squared(u));
    worst = std::max(worst, lhs / (std::pow(l2, beta) * std::pow(grad, gamma)));
  }
  const double c = 1.05 * worst;
  cache.emplace(std::make_pair(d, alpha), c);
  return c;
}

GnProbe gn_probe(const Field& u, double alpha, double eps) {
  const int d = u.grid().dim();
  if (!(alpha > 1.0) || !(alpha < mass_critical_exponent(d)))
    throw InvalidArgument("gn_probe needs 1 < alpha < 1 + 4/d");
  if (!(eps > 0.0)) throw InvalidArgument("gn_probe needs eps > 0");
  GnProbe out{};
  out.theta = gn_theta(d, alpha);
  out.beta = (1.0 - out.theta) * (alpha + 1.0);
  out.gamma = out.theta * (alpha + 1.0);
  out.constant = gn_constant(d, alpha);
  out.lhs = lp_power(u, alpha + 1.0);
  const double l2 = lp_norm(u, 2.0);
  const double grad2 = gradient_norm_squared(u);
  out.rhs = out.constant * std::pow(l2, out.beta) * std::pow(grad2, 0.5 * out.gamma);

  // a b <= eps b^delta + (a/eta)^rho / rho with a = C|u|^beta, b = |grad u|^gamma,
  // delta = 2/gamma, rho = delta/(delta-1), eta = (eps delta)^(1/delta).
  const double delta = 2.0 / out.gamma;
  const double rho = delta / (delta - 1.0);
  const double eta = std::pow(eps * delta, 1.0 / delta);
  const double a = out.constant * std::pow(l2, out.beta);
  out.eps_power = out.beta * rho;
  out.eps_rhs = eps * grad2 + std::pow(a / eta, rho) / rho;
  return out;
}

}  // namespace snls
