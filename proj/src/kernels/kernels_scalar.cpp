#include "snls/kernels.hpp"

// Reference kernels. Complex products are spelled out component-wise so the
// AVX2 variants can reproduce them bit for bit.

namespace snls::kernels {
namespace {

void cmul_scalar(cplx* u, const cplx* f, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u[i].real(), b = u[i].imag();
    const double c = f[i].real(), d = f[i].imag();
    u[i] = cplx(a * c - b * d, b * c + a * d);
  }
}

void rmul_scalar(cplx* u, const double* r, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    u[i] = cplx(u[i].real() * r[i], u[i].imag() * r[i]);
}

void scale_scalar(cplx* u, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    u[i] = cplx(u[i].real() * s, u[i].imag() * s);
}

void imul_real_scalar(cplx* out, const cplx* u, const double* k, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u[i].real(), b = u[i].imag();
    out[i] = cplx(-(k[i] * b), k[i] * a);
  }
}

void abs2_scalar(double* out, const cplx* u, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u[i].real(), b = u[i].imag();
    out[i] = a * a + b * b;
  }
}

void axpy_scalar(cplx* y, cplx alpha, const cplx* x, std::size_t n) {
  const double c = alpha.real(), d = alpha.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = x[i].real(), b = x[i].imag();
    y[i] = cplx(y[i].real() + (a * c - b * d), y[i].imag() + (b * c + a * d));
  }
}

double sum_abs2_scalar(const cplx* u, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u[i].real(), b = u[i].imag();
    s += a * a + b * b;
  }
  return s;
}

cplx cdot_scalar(const cplx* u, const cplx* v, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = u[i].real(), b = u[i].imag();
    const double c = v[i].real(), d = v[i].imag();
    re += a * c + b * d;
    im += b * c - a * d;
  }
  return {re, im};
}

constexpr KernelTable kScalar{
    "scalar",     cmul_scalar, rmul_scalar,     scale_scalar,  imul_real_scalar,
    abs2_scalar,  axpy_scalar, sum_abs2_scalar, cdot_scalar,
};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace snls::kernels
