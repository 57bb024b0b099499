#pragma once

// Residuals of the exact Ito evolution formulas along a simulated
// trajectory. Deterministic integrals use left Riemann sums and stochastic
// integrals use left-point (Ito) sums over the same path increments, so the
// residual measures the formula error of the discrete trajectory only.

#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "snls/dynamics.hpp"
#include "snls/noise.hpp"

namespace snls {

struct IdentityReport {
  std::string name;
  double dt = 0.0;
  std::vector<double> time;
  /// lhs(t) - lhs(0) - sum of the accumulated terms; residual[0] == 0.
  std::vector<double> residual;
  std::vector<std::string> term_names;
  /// Accumulated contribution of each right-hand-side term, aligned with time.
  std::vector<std::vector<double>> terms;
  /// The Brownian increments the Ito sums were taken against.
  std::shared_ptr<const std::vector<double>> increments;

  double terminal_residual() const { return residual.empty() ? 0.0 : residual.back(); }
  const std::vector<double>& term(const std::string& term_name) const;
};

/// |X(t)|_2^2 = |x|_2^2 + 2 sum_j int Re mu_j <X, X e_j> dbeta_j
IdentityReport mass_identity(const Trajectory& trajectory, const WienerPath& path,
                             const NoiseModel& model);

/// H(X(t)) = H(x) + int Re<-grad(mu X), grad X> ds + 1/2 sum_j int |grad(X phi_j)|^2 ds
///   - 1/2 lambda (alpha-1) sum_j int int (Re phi_j)^2 |X|^(alpha+1) ds
///   + sum_j int Re<grad(phi_j X), grad X> dbeta_j - lambda sum_j int int Re phi_j |X|^(alpha+1) dbeta_j
IdentityReport hamiltonian_identity(const Trajectory& trajectory, const WienerPath& path,
                                    const ProblemSpec& spec);

/// |X(t)|_p^p with p = alpha + 1:
///   |x|_p^p - p int Re int i grad g(X) . grad conj(X) ds
///   + 1/2 p (p-2) sum_j int int (Re phi_j)^2 |X|^p ds + p sum_j int int Re phi_j |X|^p dbeta_j
/// with grad g = (p-2)/2 |X|^(p-4) X^2 grad conj(X) + p/2 |X|^(p-2) grad X.
IdentityReport lp_identity(const Trajectory& trajectory, const WienerPath& path,
                           const ProblemSpec& spec);

/// |grad X(t)|_2^2 = |grad x|_2^2 + 2 int Re<-grad(mu X), grad X> ds + sum_j int |grad(X phi_j)|^2 ds
///   - 2 lambda int Re int i grad g_m . grad conj(X) ds + 2 sum_j int Re<grad(phi_j X), grad X> dbeta_j
/// where g_m = Theta_m g(X). Without a cutoff Theta_m is the identity
/// (equivalent to m at or above the grid Nyquist radius).
IdentityReport h1_identity(const Trajectory& trajectory, const WienerPath& path,
                           const ProblemSpec& spec,
                           std::optional<double> cutoff = std::nullopt);

/// Columns: t, residual, then one column per term.
void write_csv(const IdentityReport& report, std::ostream& out);

}  // namespace snls
