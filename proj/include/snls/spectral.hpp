#pragma once

// Periodic box [-L/2, L/2)^d sampled on n^d points, plus the spectral
// calculus used by every solver: FFTs, derivatives, quadrature and the
// smooth Fourier cutoff Theta_m.

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <new>
#include <span>
#include <vector>

namespace snls {

using cplx = std::complex<double>;

template <class T, std::size_t Align = 64>
struct AlignedAllocator {
  using value_type = T;
  template <class U>
  struct rebind {
    using other = AlignedAllocator<U, Align>;
  };
  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U, Align>&) noexcept {}
  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t{Align}));
  }
  void deallocate(T* p, std::size_t) noexcept {
    ::operator delete(p, std::align_val_t{Align});
  }
  template <class U>
  bool operator==(const AlignedAllocator<U, Align>&) const noexcept { return true; }
};

template <class T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

/// Uniform periodic grid with its FFT plans. Immutable after construction and
/// safe to share between threads; transforms only read the plans.
class Grid {
 public:
  /// dim in {1,2,3}; n >= 8 a power of two; box_length > 0.
  static GridPtr make(int dim, int n, double box_length);

  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;
  ~Grid();

  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  double spacing() const noexcept { return length_ / n_; }
  /// n^d
  std::size_t size() const noexcept { return size_; }
  /// h^d, the quadrature weight.
  double cell_volume() const noexcept { return cell_volume_; }
  /// L^d
  double volume() const noexcept;

  /// Axis-a wavenumber at every flattened point (row-major, axis 0 slowest).
  std::span<const double> k_axis(int axis) const { return k_axis_[axis]; }
  /// |k|^2 at every flattened point.
  std::span<const double> k_squared() const { return k2_; }
  /// Axis-a coordinate at every flattened point.
  std::span<const double> coordinate(int axis) const { return x_axis_[axis]; }

  double max_k_squared() const noexcept { return max_k2_; }
  /// Largest |k| on the grid; Theta_m is the identity for m >= this.
  double nyquist_radius() const noexcept;

  /// In-place unnormalized forward DFT.
  void forward(std::span<cplx> data) const;
  /// In-place inverse DFT including the 1/n^d factor.
  void inverse(std::span<cplx> data) const;

  bool same_shape(const Grid& other) const noexcept {
    return dim_ == other.dim_ && n_ == other.n_ && length_ == other.length_;
  }

 private:
  Grid(int dim, int n, double box_length);
  void execute(void* plan, std::span<cplx> data) const;

  int dim_;
  int n_;
  double length_;
  std::size_t size_;
  double cell_volume_;
  double max_k2_ = 0.0;
  std::array<std::vector<double>, 3> k_axis_;
  std::array<std::vector<double>, 3> x_axis_;
  std::vector<double> k2_;
  void* plan_forward_ = nullptr;
  void* plan_inverse_ = nullptr;
};

/// Complex samples on a grid. Entries must stay finite; operations that can
/// produce NaN/Inf check and throw NumericFailure.
class Field {
 public:
  explicit Field(GridPtr grid);
  Field(GridPtr grid, std::span<const cplx> values);

  template <class F>
  static Field from_function(GridPtr grid, F&& f) {
    Field out(grid);
    const int d = grid->dim();
    std::array<double, 3> xi{};
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (int a = 0; a < d; ++a) xi[a] = grid->coordinate(a)[i];
      out.values_[i] = f(std::span<const double>(xi.data(), d));
    }
    return out;
  }

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<cplx> values() noexcept { return values_; }
  std::span<const cplx> values() const noexcept { return values_; }
  cplx& operator[](std::size_t i) noexcept { return values_[i]; }
  const cplx& operator[](std::size_t i) const noexcept { return values_[i]; }

  bool all_finite() const noexcept;
  /// Throws NumericFailure naming `what` if any entry is NaN/Inf.
  void require_finite(const char* what, double time = 0.0) const;

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(cplx s);
  Field& operator*=(double s);

 private:
  GridPtr grid_;
  AlignedVector<cplx> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(cplx s, Field a);
Field operator*(double s, Field a);

void require_same_grid(const Field& a, const Field& b);

/// Forward DFT coefficients (unnormalized), stored in a Field on the same grid.
Field to_spectral(const Field& u);
/// Inverse of to_spectral.
Field from_spectral(const Field& uhat);

/// Spectral partial derivatives, one Field per axis.
std::vector<Field> gradient(const Field& u);
Field laplacian(const Field& u);
/// Sum of spectral d/dxi_a of components[a].
Field divergence(std::span<const Field> components);

/// <u, v> = h^d sum u conj(v)
cplx inner_product(const Field& u, const Field& v);
/// Same pairing evaluated from Fourier coefficients (Plancherel).
cplx inner_product_spectral(const Field& u, const Field& v);

/// |u|_{L^p} for p >= 1; p = +inf gives the max norm.
double lp_norm(const Field& u, double p);
/// h^d sum |u|^p, i.e. lp_norm^p without the root.
double lp_power(const Field& u, double p);
/// |grad u|_2^2 evaluated in Fourier space.
double gradient_norm_squared(const Field& u);
/// |u|_2 + |grad u|_2
double h1_norm(const Field& u);
/// max |u| over the box faces divided by max |u| (0 for the zero field).
/// Runs count as valid periodic surrogates of whole-space data when <= 1e-8.
double boundary_ratio(const Field& u);
inline constexpr double kBoundaryTolerance = 1e-8;

/// C-infinity cutoff: 1 on [0,1], 0 on [2,inf), smooth monotone ramp between.
double theta_bump(double r) noexcept;
/// Fourier multiplier u_hat(k) -> theta(|k|/m) u_hat(k). m > 0.
Field theta_m(const Field& u, double m);

/// |a|^q computed from |a|^2; exact products for q in {2,4,6}, otherwise
/// exp(q/2 log|a|^2) with 0 returned when |a| < 1e-150.
double pow_from_abs2(double abs2, double q) noexcept;

}  // namespace snls
