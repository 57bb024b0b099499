#pragma once

#include <cstdint>

#include "snls/spectral.hpp"

namespace snls {

/// |u|_2^2
double mass(const Field& u);

/// H(u) = 1/2 |grad u|_2^2 - lambda/(alpha+1) |u|_{alpha+1}^{alpha+1}.
/// Throws InvalidArgument when classify() puts alpha out of range.
double hamiltonian(const Field& u, double alpha, int lambda);

struct GnProbe {
  double lhs;        // |u|_{alpha+1}^{alpha+1}
  double rhs;        // C |u|_2^beta |grad u|_2^gamma
  double theta;      // d(alpha-1) / (2(alpha+1))
  double beta;       // (1-theta)(alpha+1)
  double gamma;      // theta(alpha+1), < 2 in the mass-subcritical range
  double constant;   // calibrated C for (d, alpha)
  double eps_rhs;    // eps |grad u|_2^2 + C_eps |u|_2^(beta rho) from Young's inequality
  double eps_power;  // beta rho, the |u|_2 exponent in eps_rhs
};

/// d(alpha-1) / (2(alpha+1))
double gn_theta(int d, double alpha) noexcept;

/// Gagliardo-Nirenberg probe. Requires 1 < alpha < 1 + 4/d (else
/// InvalidArgument). eps > 0 selects the split in eps_rhs.
GnProbe gn_probe(const Field& u, double alpha, double eps = 0.5);

/// 1.05 x the largest lhs / (|u|_2^beta |grad u|_2^gamma) over 1000 random
/// band-limited mean-zero fields on a fixed reference grid. Deterministic;
/// cached per (d, alpha).
double gn_constant(int d, double alpha);

/// One member of the calibration family: random complex Fourier coefficients
/// on 1 <= |k index| <= 6 with 1/(1+|k|^2) amplitude decay, no mean mode.
Field random_band_limited_field(GridPtr grid, std::uint64_t seed, std::uint64_t index);

}  // namespace snls
