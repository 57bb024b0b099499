#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "snls/spectral.hpp"

namespace snls::test {

/// Smooth random field: a few random low Fourier modes, generated with the
/// standard library engine so the library's own generator is not involved.
inline Field random_smooth_field(const GridPtr& grid, std::uint32_t seed, int max_mode = 4) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const int d = grid->dim();
  const double L = grid->length();
  struct Term {
    std::array<int, 3> m;
    cplx c;
  };
  std::vector<Term> terms;
  std::uniform_int_distribution<int> mode(-max_mode, max_mode);
  for (int t = 0; t < 6; ++t) {
    Term term{{0, 0, 0}, cplx(normal(rng), normal(rng))};
    for (int a = 0; a < d; ++a) term.m[a] = mode(rng);
    terms.push_back(term);
  }
  return Field::from_function(grid, [&](std::span<const double> xi) {
    cplx s = 0.0;
    for (const auto& term : terms) {
      double phase = 0.0;
      for (int a = 0; a < d; ++a) phase += 2.0 * M_PI * term.m[a] / L * xi[a];
      s += term.c * std::polar(1.0, phase);
    }
    return s;
  });
}

inline Field gaussian_field(const GridPtr& grid, double amplitude = 1.0, double width = 1.0) {
  return Field::from_function(grid, [&](std::span<const double> xi) {
    double r2 = 0.0;
    for (double v : xi) r2 += v * v;
    return cplx(amplitude * std::exp(-r2 / (width * width)), 0.0);
  });
}

inline double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const Field& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

}  // namespace snls::test
