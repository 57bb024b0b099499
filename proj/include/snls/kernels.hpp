#pragma once

// Pointwise and reduction kernels over interleaved complex<double> arrays.
//
// Every kernel has a scalar reference implementation; an AVX2 variant is
// selected at runtime when the CPU supports it. Pointwise kernels are
// bit-identical across variants (no FMA contraction); reductions agree to
// rounding. Set SNLS_SIMD=scalar in the environment to force the reference
// path.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace snls::kernels {

using cplx = std::complex<double>;

struct KernelTable {
  std::string_view name;
  // u[i] *= f[i]
  void (*cmul)(cplx* u, const cplx* f, std::size_t n);
  // u[i] *= r[i]
  void (*rmul)(cplx* u, const double* r, std::size_t n);
  // u[i] *= s
  void (*scale)(cplx* u, double s, std::size_t n);
  // out[i] = i * k[i] * u[i]
  void (*imul_real)(cplx* out, const cplx* u, const double* k, std::size_t n);
  // out[i] = |u[i]|^2
  void (*abs2)(double* out, const cplx* u, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(cplx* y, cplx a, const cplx* x, std::size_t n);
  // sum |u[i]|^2
  double (*sum_abs2)(const cplx* u, std::size_t n);
  // sum u[i] * conj(v[i])
  cplx (*cdot)(const cplx* u, const cplx* v, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_table() noexcept;
bool cpu_has_avx2() noexcept;

/// The table selected for this process (resolved once, on first use).
const KernelTable& active() noexcept;

inline void cmul(std::span<cplx> u, std::span<const cplx> f) {
  active().cmul(u.data(), f.data(), u.size());
}
inline void rmul(std::span<cplx> u, std::span<const double> r) {
  active().rmul(u.data(), r.data(), u.size());
}
inline void scale(std::span<cplx> u, double s) {
  active().scale(u.data(), s, u.size());
}
inline void imul_real(std::span<cplx> out, std::span<const cplx> u,
                      std::span<const double> k) {
  active().imul_real(out.data(), u.data(), k.data(), u.size());
}
inline void abs2(std::span<double> out, std::span<const cplx> u) {
  active().abs2(out.data(), u.data(), u.size());
}
inline void axpy(std::span<cplx> y, cplx a, std::span<const cplx> x) {
  active().axpy(y.data(), a, x.data(), y.size());
}
inline double sum_abs2(std::span<const cplx> u) {
  return active().sum_abs2(u.data(), u.size());
}
inline cplx cdot(std::span<const cplx> u, std::span<const cplx> v) {
  return active().cdot(u.data(), v.data(), u.size());
}

}  // namespace snls::kernels
