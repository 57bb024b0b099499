#pragma once

// Exponent classification for i dX = (Delta X + lambda |X|^(alpha-1) X) dt + ...
// and the Strichartz admissibility relation 2/q = d/2 - d/p.

#include <string_view>

namespace snls {

enum class RegimeTag {
  defocusing_subcritical,
  focusing_mass_subcritical,
  focusing_mass_critical,
  focusing_mass_supercritical_energy_subcritical,
  energy_critical,
  out_of_range,
};

struct Regime {
  RegimeTag tag;
  /// True exactly for defocusing with 1 < alpha < 1 + 4/(d-2)_+ and focusing
  /// with 1 < alpha < 1 + 4/d.
  bool global;
};

std::string_view to_string(RegimeTag tag) noexcept;

/// d in {1,2,3}; lambda = +1 focusing, -1 defocusing. Equality with a
/// threshold is decided with a 1e-12 relative tolerance.
Regime classify(int d, double alpha, int lambda);

/// 2/q = d/2 - d/p within 1e-12, with (p, q) in [2,inf] x [2,inf] for d != 2
/// and [2,inf) x (2,inf] for d = 2. Infinite exponents are passed as +inf.
bool is_strichartz_pair(double p, double q, int d);

/// 1 + 4/d
double mass_critical_exponent(int d) noexcept;
/// 1 + 4/(d-2) for d >= 3, +inf otherwise.
double energy_critical_exponent(int d) noexcept;

}  // namespace snls
