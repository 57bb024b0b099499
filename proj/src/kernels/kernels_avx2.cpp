// Compiled with -mavx2 only. FMA is deliberately left off so the pointwise
// kernels round exactly like the scalar reference.

#include <immintrin.h>

#include "snls/kernels.hpp"

namespace snls::kernels {
namespace {

// Two complex numbers per register: [re0, im0, re1, im1].
inline __m256d load2(const cplx* p) {
  return _mm256_loadu_pd(reinterpret_cast<const double*>(p));
}
inline void store2(cplx* p, __m256d v) {
  _mm256_storeu_pd(reinterpret_cast<double*>(p), v);
}

// (a + ib)(c + id) = (ac - bd) + i(bc + ad)
inline __m256d mul2(__m256d u, __m256d f) {
  const __m256d c = _mm256_movedup_pd(f);
  const __m256d d = _mm256_permute_pd(f, 0xF);
  const __m256d t1 = _mm256_mul_pd(u, c);
  const __m256d t2 = _mm256_mul_pd(_mm256_permute_pd(u, 0x5), d);
  return _mm256_addsub_pd(t1, t2);
}

void cmul_avx2(cplx* u, const cplx* f, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store2(u + i, mul2(load2(u + i), load2(f + i)));
  for (; i < n; ++i) {
    const double a = u[i].real(), b = u[i].imag();
    const double c = f[i].real(), d = f[i].imag();
    u[i] = cplx(a * c - b * d, b * c + a * d);
  }
}

void rmul_avx2(cplx* u, const double* r, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    // [r0, r0, r1, r1]
    const __m128d rr = _mm_loadu_pd(r + i);
    const __m256d rd = _mm256_permute4x64_pd(_mm256_castpd128_pd256(rr), 0x50);
    store2(u + i, _mm256_mul_pd(load2(u + i), rd));
  }
  for (; i < n; ++i) u[i] = cplx(u[i].real() * r[i], u[i].imag() * r[i]);
}

void scale_avx2(cplx* u, double s, std::size_t n) {
  const __m256d sv = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store2(u + i, _mm256_mul_pd(load2(u + i), sv));
  for (; i < n; ++i) u[i] = cplx(u[i].real() * s, u[i].imag() * s);
}

void imul_real_avx2(cplx* out, const cplx* u, const double* k, std::size_t n) {
  const __m256d sign = _mm256_set_pd(0.0, -0.0, 0.0, -0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m128d kk = _mm_loadu_pd(k + i);
    const __m256d kd = _mm256_permute4x64_pd(_mm256_castpd128_pd256(kk), 0x50);
    // [k a, k b] -> [k b, k a] -> [-(k b), k a]
    const __m256d p = _mm256_mul_pd(load2(u + i), kd);
    store2(out + i, _mm256_xor_pd(_mm256_permute_pd(p, 0x5), sign));
  }
  for (; i < n; ++i) {
    const double a = u[i].real(), b = u[i].imag();
    out[i] = cplx(-(k[i] * b), k[i] * a);
  }
}

void abs2_avx2(double* out, const cplx* u, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = load2(u + i);
    const __m256d b = load2(u + i + 2);
    const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
    _mm256_storeu_pd(out + i, _mm256_permute4x64_pd(h, 0xD8));
  }
  for (; i < n; ++i) {
    const double a = u[i].real(), b = u[i].imag();
    out[i] = a * a + b * b;
  }
}

void axpy_avx2(cplx* y, cplx alpha, const cplx* x, std::size_t n) {
  const __m256d av = _mm256_set_pd(alpha.imag(), alpha.real(), alpha.imag(), alpha.real());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    store2(y + i, _mm256_add_pd(load2(y + i), mul2(load2(x + i), av)));
  const double c = alpha.real(), d = alpha.imag();
  for (; i < n; ++i) {
    const double a = x[i].real(), b = x[i].imag();
    y[i] = cplx(y[i].real() + (a * c - b * d), y[i].imag() + (b * c + a * d));
  }
}

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(s) + _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
}

double sum_abs2_avx2(const cplx* u, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = load2(u + i);
    const __m256d b = load2(u + i + 2);
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(a, a));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(b, b));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double a = u[i].real(), b = u[i].imag();
    s += a * a + b * b;
  }
  return s;
}

cplx cdot_avx2(const cplx* u, const cplx* v, std::size_t n) {
  // re lanes accumulate [ac, bd], im lanes accumulate [bc, ad]
  __m256d re = _mm256_setzero_pd(), im = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d a = load2(u + i);
    const __m256d b = load2(v + i);
    re = _mm256_add_pd(re, _mm256_mul_pd(a, b));
    im = _mm256_add_pd(im, _mm256_mul_pd(_mm256_permute_pd(a, 0x5), b));
  }
  alignas(32) double r[4], m[4];
  _mm256_store_pd(r, re);
  _mm256_store_pd(m, im);
  double sre = (r[0] + r[2]) + (r[1] + r[3]);
  // im part: b c - a d ; lanes hold [b c, a d]
  double sim = (m[0] + m[2]) - (m[1] + m[3]);
  for (; i < n; ++i) {
    const double a = u[i].real(), b = u[i].imag();
    const double c = v[i].real(), d = v[i].imag();
    sre += a * c + b * d;
    sim += b * c - a * d;
  }
  return {sre, sim};
}

constexpr KernelTable kAvx2{
    "avx2",    cmul_avx2, rmul_avx2,     scale_avx2, imul_real_avx2,
    abs2_avx2, axpy_avx2, sum_abs2_avx2, cdot_avx2,
};

}  // namespace

const KernelTable* avx2_table() noexcept { return &kAvx2; }

}  // namespace snls::kernels
