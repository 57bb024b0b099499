#include "snls/regime.hpp"

#include <cmath>
#include <limits>

#include "snls/error.hpp"

namespace snls {
namespace {

constexpr double kRelTol = 1e-12;

bool near(double a, double b) {
  return std::abs(a - b) <= kRelTol * std::max(1.0, std::abs(b));
}

}  // namespace

std::string_view to_string(RegimeTag tag) noexcept {
  switch (tag) {
    case RegimeTag::defocusing_subcritical: return "defocusing-subcritical";
    case RegimeTag::focusing_mass_subcritical: return "focusing-mass-subcritical";
    case RegimeTag::focusing_mass_critical: return "focusing-mass-critical";
    case RegimeTag::focusing_mass_supercritical_energy_subcritical:
      return "focusing-mass-supercritical-energy-subcritical";
    case RegimeTag::energy_critical: return "energy-critical";
    case RegimeTag::out_of_range: return "out-of-range";
  }
  return "out-of-range";
}

double mass_critical_exponent(int d) noexcept { return 1.0 + 4.0 / d; }

double energy_critical_exponent(int d) noexcept {
  return d >= 3 ? 1.0 + 4.0 / (d - 2) : std::numeric_limits<double>::infinity();
}

Regime classify(int d, double alpha, int lambda) {
  if (d < 1 || d > 3) throw InvalidArgument("classify supports d = 1, 2, 3");
  if (lambda != 1 && lambda != -1) throw InvalidArgument("lambda must be +1 or -1");
  if (!(alpha > 1.0) || near(alpha, 1.0) || !std::isfinite(alpha))
    return {RegimeTag::out_of_range, false};

  const double energy = energy_critical_exponent(d);
  if (std::isfinite(energy)) {
    if (near(alpha, energy)) return {RegimeTag::energy_critical, false};
    if (alpha > energy) return {RegimeTag::out_of_range, false};
  }
  if (lambda == -1) return {RegimeTag::defocusing_subcritical, true};

  const double mass = mass_critical_exponent(d);
  if (near(alpha, mass)) return {RegimeTag::focusing_mass_critical, false};
  if (alpha < mass) return {RegimeTag::focusing_mass_subcritical, true};
  return {RegimeTag::focusing_mass_supercritical_energy_subcritical, false};
}

bool is_strichartz_pair(double p, double q, int d) {
  if (std::isnan(p) || std::isnan(q) || d < 1) return false;
  if (p < 2.0 || q < 2.0) return false;
  if (d == 2 && (std::isinf(p) || q == 2.0)) return false;
  const double lhs = std::isinf(q) ? 0.0 : 2.0 / q;
  const double rhs = 0.5 * d - (std::isinf(p) ? 0.0 : d / p);
  return std::abs(lhs - rhs) <= 1e-12;
}

}  // namespace snls
