#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "snls/error.hpp"
#include "snls/spectral.hpp"

namespace snls {
namespace {

// The FFTW planner is not re-entrant; execution of existing plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

GridPtr Grid::make(int dim, int n, double box_length) {
  return GridPtr(new Grid(dim, n, box_length));
}

Grid::Grid(int dim, int n, double box_length) : dim_(dim), n_(n), length_(box_length) {
  if (dim < 1 || dim > 3) throw InvalidArgument("grid dimension must be 1, 2 or 3");
  if (n < 8 || !is_power_of_two(n))
    throw InvalidArgument("grid points per axis must be a power of two >= 8");
  if (!(box_length > 0.0) || !std::isfinite(box_length))
    throw InvalidArgument("box length must be positive");

  size_ = 1;
  for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(n);
  const double h = box_length / n;
  cell_volume_ = std::pow(h, dim);

  std::vector<double> k1(n), x1(n);
  const double dk = 2.0 * std::numbers::pi / box_length;
  for (int i = 0; i < n; ++i) {
    k1[i] = dk * (i < n / 2 ? i : i - n);
    x1[i] = -0.5 * box_length + i * h;
  }

  k2_.assign(size_, 0.0);
  for (int a = 0; a < dim; ++a) {
    k_axis_[a].resize(size_);
    x_axis_[a].resize(size_);
  }
  // Row-major: axis 0 varies slowest.
  for (std::size_t idx = 0; idx < size_; ++idx) {
    std::size_t rem = idx;
    for (int a = dim - 1; a >= 0; --a) {
      const std::size_t i = rem % n;
      rem /= n;
      k_axis_[a][idx] = k1[i];
      x_axis_[a][idx] = x1[i];
      k2_[idx] += k1[i] * k1[i];
    }
    max_k2_ = std::max(max_k2_, k2_[idx]);
  }

  std::array<int, 3> dims{n, n, n};
  AlignedVector<cplx> scratch(size_);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard lock(planner_mutex());
  plan_forward_ = fftw_plan_dft(dim, dims.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  plan_inverse_ = fftw_plan_dft(dim, dims.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plan_forward_ || !plan_inverse_) throw Error("FFTW planning failed");
}

Grid::~Grid() {
  std::lock_guard lock(planner_mutex());
  if (plan_forward_) fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
  if (plan_inverse_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inverse_));
}

double Grid::volume() const noexcept { return std::pow(length_, dim_); }

double Grid::nyquist_radius() const noexcept { return std::sqrt(max_k2_); }

void Grid::execute(void* plan, std::span<cplx> data) const {
  if (data.size() != size_) throw GridMismatch("transform buffer has the wrong length");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  if (fftw_alignment_of(reinterpret_cast<double*>(p)) == 0) {
    fftw_execute_dft(static_cast<fftw_plan>(plan), p, p);
    return;
  }
  AlignedVector<cplx> tmp(data.begin(), data.end());
  auto* q = reinterpret_cast<fftw_complex*>(tmp.data());
  fftw_execute_dft(static_cast<fftw_plan>(plan), q, q);
  std::copy(tmp.begin(), tmp.end(), data.begin());
}

void Grid::forward(std::span<cplx> data) const { execute(plan_forward_, data); }

void Grid::inverse(std::span<cplx> data) const {
  execute(plan_inverse_, data);
  const double s = 1.0 / static_cast<double>(size_);
  for (auto& v : data) v *= s;
}

}  // namespace snls
