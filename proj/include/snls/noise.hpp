#pragma once

// The colored Wiener process W(t, xi) = sum_j mu_j e_j(xi) beta_j(t):
// spatial modes, the derived coefficient fields mu and mu_tilde, sampled
// Brownian paths and their dyadic (Brownian bridge) refinement.

#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "snls/spectral.hpp"

namespace snls {

struct GaussianProfile {
  std::vector<double> center;  // one entry per axis; empty means the origin
  double width = 1.0;
  double height = 1.0;
};

struct ConstantProfile {
  double height = 1.0;
};

struct CosineProfile {
  std::vector<double> wavevector;  // one entry per axis
  double height = 1.0;
};

/// Real-valued, smooth, bounded spatial profile e_j.
using Profile = std::variant<GaussianProfile, ConstantProfile, CosineProfile>;

double evaluate_profile(const Profile& p, std::span<const double> xi);

struct NoiseMode {
  cplx mu;
  Profile profile;
};

/// Modes together with everything the solvers need precomputed on the grid.
/// Immutable; share freely between threads.
class NoiseModel {
 public:
  /// Throws NumericFailure if a profile is not finite on the grid.
  static NoiseModel build(std::vector<NoiseMode> modes, GridPtr grid);

  std::size_t mode_count() const noexcept { return modes_.size(); }
  const std::vector<NoiseMode>& modes() const noexcept { return modes_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }

  /// e_j sampled on the grid.
  std::span<const double> e(std::size_t j) const { return e_[j]; }
  /// phi_j = mu_j e_j
  const Field& phi(std::size_t j) const { return phi_[j]; }
  /// mu = 1/2 sum |mu_j|^2 e_j^2
  std::span<const double> mu() const { return mu_; }
  /// mu_tilde = 1/2 sum mu_j^2 e_j^2
  const Field& mu_tilde() const { return mu_tilde_; }
  /// Re mu_j == 0 for every j.
  bool conservative() const noexcept { return conservative_; }

 private:
  NoiseModel(std::vector<NoiseMode> modes, GridPtr grid);

  std::vector<NoiseMode> modes_;
  GridPtr grid_;
  std::vector<AlignedVector<double>> e_;
  std::vector<Field> phi_;
  AlignedVector<double> mu_;
  Field mu_tilde_;
  bool conservative_ = true;
};

/// Increments of N independent Brownian motions on a uniform time grid.
class WienerPath {
 public:
  WienerPath(double horizon, std::size_t steps, std::size_t modes, std::uint64_t seed,
             std::uint64_t path_id, int level, std::vector<double> increments);

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t modes() const noexcept { return modes_; }
  double dt() const noexcept { return horizon_ / static_cast<double>(steps_); }
  double time(std::size_t index) const noexcept;
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t path_id() const noexcept { return path_id_; }
  int level() const noexcept { return level_; }

  /// Delta beta_j over [t_step, t_step+1].
  double increment(std::size_t step, std::size_t j) const {
    return (*increments_)[step * modes_ + j];
  }
  /// beta_j(t_index); beta_j(0) = 0.
  double beta(std::size_t index, std::size_t j) const { return beta_[index * modes_ + j]; }

  /// Step-major increment storage, shared by every consumer of this path.
  const std::shared_ptr<const std::vector<double>>& increments() const noexcept {
    return increments_;
  }

 private:
  double horizon_;
  std::size_t steps_;
  std::size_t modes_;
  std::uint64_t seed_;
  std::uint64_t path_id_;
  int level_;
  std::shared_ptr<const std::vector<double>> increments_;
  std::vector<double> beta_;
};

/// Level-0 path with `steps` increments of N(0, T/steps) per mode. Draws are
/// keyed on (seed, path_id, mode, step), so identical arguments give
/// bit-identical paths.
WienerPath sample_path(std::size_t modes, double horizon, std::size_t steps,
                       std::uint64_t seed, std::uint64_t path_id = 0);
WienerPath sample_path(const NoiseModel& model, double horizon, std::size_t steps,
                       std::uint64_t seed, std::uint64_t path_id = 0);

/// Halves the step: each coarse increment D splits into D/2 + sqrt(dt/4) Z and
/// the remainder, so the two fine increments sum back to D.
WienerPath refine_path(const WienerPath& path);

/// W(t_index) = sum_j phi_j beta_j(t_index).
Field eval_W(const NoiseModel& model, const WienerPath& path, std::size_t t_index);
/// W(t_step+1) - W(t_step).
Field eval_dW(const NoiseModel& model, const WienerPath& path, std::size_t step);

/// Pointwise exp(dW - (mu + mu_tilde) dt); drop_mu_tilde leaves mu_tilde out
/// (a deliberately wrong factor used to check the martingale test has power).
Field noise_factor(const NoiseModel& model, const Field& dW, double dt,
                   bool drop_mu_tilde = false);

}  // namespace snls
