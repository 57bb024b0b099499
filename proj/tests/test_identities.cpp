#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "snls/error.hpp"
#include "snls/functionals.hpp"
#include "snls/identities.hpp"
#include "snls/montecarlo.hpp"
#include "support.hpp"

using namespace snls;

namespace {

ProblemSpec make_spec(const GridPtr& g, double alpha, int lambda, double T, std::vector<NoiseMode> modes = {}) {
  ProblemSpec s;
  s.alpha = alpha;
  s.lambda = lambda;
  s.horizon = T;
  s.noise = std::make_shared<const NoiseModel>(NoiseModel::build(std::move(modes), g));
  return s;
}

Field soliton(const GridPtr& g) {
  return Field::from_function(g, [](std::span<const double> x) { return cplx(std::sqrt(2.0) / std::cosh(x[0])); });
}

Trajectory dense(const Field& x, const WienerPath& path, const ProblemSpec& spec) {
  SolveOptions o;
  o.stride = 1;
  return solve_direct(x, path, spec, o);
}

TEST(Identities, RequireDenseSnapshots) {
  auto g = Grid::make(1, 32, 8.0);
  const auto spec = make_spec(g, 3.0, 1, 0.1);
  const auto path = sample_path(0, 0.1, 10, 0);
  SolveOptions o;
  o.stride = 2;
  const Trajectory t = solve_direct(test::gaussian_field(g), path, spec, o);
  EXPECT_THROW(mass_identity(t, path, *spec.noise), InvalidArgument);
  EXPECT_THROW(hamiltonian_identity(t, path, spec), InvalidArgument);
  EXPECT_THROW(lp_identity(t, path, spec), InvalidArgument);
  EXPECT_THROW(h1_identity(t, path, spec), InvalidArgument);
}

TEST(Identities, ConservativeModeZerosAndSharedIncrements) {
  auto g = Grid::make(1, 128, 16.0);
  const auto spec = make_spec(g, 3.0, 1, 0.2, {{cplx(0, 0.8), GaussianProfile{{}, 2.0, 1.0}}});
  const auto path = sample_path(*spec.noise, 0.2, 200, 11);
  const Trajectory t = dense(test::gaussian_field(g, 1.2), path, spec);
  const auto m = mass_identity(t, path, *spec.noise);
  const auto h = hamiltonian_identity(t, path, spec);
  const auto lp = lp_identity(t, path, spec);
  const auto h1 = h1_identity(t, path, spec);
  for (const auto* r : {&m, &h, &lp, &h1}) {
    EXPECT_EQ(r->residual.front(), 0.0);
    EXPECT_EQ(r->residual.size(), 201u);
    EXPECT_EQ(r->dt, path.dt());
    EXPECT_EQ(r->increments.get(), path.increments().get());
    for (const auto& series : r->terms) EXPECT_EQ(series.size(), r->time.size());
  }
  for (double v : m.term("martingale")) EXPECT_EQ(v, 0.0);
  for (double v : h.term("nonlinear_drift")) EXPECT_EQ(v, 0.0);
  for (double v : h.term("potential_martingale")) EXPECT_EQ(v, 0.0);
  for (double v : lp.term("ito_correction")) EXPECT_EQ(v, 0.0);
  for (double v : lp.term("martingale")) EXPECT_EQ(v, 0.0);
  EXPECT_LE(std::abs(m.terminal_residual()), 1e-12 * mass(t.snapshots[0]));
  EXPECT_THROW(h.term("nope"), InvalidArgument);
}

TEST(Identities, DeterministicMassIsSchemeDrift) {
  auto g = Grid::make(1, 128, 16.0);
  const auto spec = make_spec(g, 3.0, -1, 0.2);
  const auto path = sample_path(0, 0.2, 100, 0);
  const Trajectory t = dense(test::gaussian_field(g), path, spec);
  const auto m = mass_identity(t, path, *spec.noise);
  EXPECT_DOUBLE_EQ(m.terminal_residual(), t.diagnostics.mass.back() - t.diagnostics.mass.front());
  EXPECT_LE(std::abs(m.terminal_residual()), 1e-12);
}

TEST(Identities, DeterministicHamiltonianOnSoliton) {
  auto g = Grid::make(1, 512, 40.0);
  const auto spec = make_spec(g, 3.0, 1, 1.0);
  const auto path = sample_path(0, 1.0, 1000, 0);
  const auto h = hamiltonian_identity(dense(soliton(g), path, spec), path, spec);
  EXPECT_LE(std::abs(h.terminal_residual()) / (2.0 / 3.0), 1e-6);
}

TEST(Identities, FreeFlowGradientNormConstant) {
  auto g = Grid::make(2, 32, 8.0);
  auto spec = make_spec(g, 3.0, 1, 0.5);
  spec.flags.nonlinearity = false;
  const auto path = sample_path(0, 0.5, 50, 0);
  const auto h1 = h1_identity(dense(test::random_smooth_field(g, 3), path, spec), path, spec);
  for (double r : h1.residual) EXPECT_LE(std::abs(r), 1e-10);
}

TEST(Identities, DeterministicGradientNormBalance) {
  // d/dt |grad X|^2 = -2 lambda Re int i grad g . grad conj(X); compare the
  // accumulated right side with the gradient-norm change and with a central
  // finite difference of |grad X|^2.
  auto g = Grid::make(1, 512, 40.0);
  const auto spec = make_spec(g, 3.0, 1, 0.5);
  const std::size_t steps = 2000;
  const auto path = sample_path(0, 0.5, steps, 0);
  const Field x = Field::from_function(g, [](std::span<const double> s) { return cplx(1.6 / std::cosh(s[0])); });
  const Trajectory t = dense(x, path, spec);
  const auto h1 = h1_identity(t, path, spec);
  const double scale = gradient_norm_squared(x);
  // Left-point sums are first order: the terminal residual halves with dt.
  const double coarse_residual = std::abs(h1.terminal_residual()) / scale;
  EXPECT_LE(coarse_residual, 2e-4);
  const auto fine_path = refine_path(path);
  const auto fine = h1_identity(dense(x, fine_path, spec), fine_path, spec);
  const double ratio = coarse_residual / (std::abs(fine.terminal_residual()) / scale);
  EXPECT_GE(ratio, 1.7);
  EXPECT_LE(ratio, 2.3);
  const auto& drift = h1.term("nonlinear_drift");
  const double dt = path.dt();
  for (std::size_t i : {200u, 1000u, 1800u}) {
    const double fd = (gradient_norm_squared(t.snapshots[i + 1]) - gradient_norm_squared(t.snapshots[i - 1])) / (2 * dt);
    const double rate = (drift[i + 1] - drift[i]) / dt;
    EXPECT_LE(std::abs(fd - rate), 1e-3 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Identities, FlatFieldLpIsConstant) {
  auto g = Grid::make(1, 16, 4.0);
  auto spec = make_spec(g, 3.0, 1, 1.0);
  spec.flags.dispersion = false;
  const auto path = sample_path(0, 1.0, 100, 0);
  Field x(g);
  for (auto& v : x.values()) v = cplx(0.8, 0.3);
  const auto lp = lp_identity(dense(x, path, spec), path, spec);
  for (double v : lp.term("dispersive_drift")) EXPECT_EQ(v, 0.0);
  for (double r : lp.residual) EXPECT_LE(std::abs(r), 1e-12);
}

TEST(Identities, CutoffAboveNyquistChangesNothing) {
  auto g = Grid::make(1, 64, 10.0);
  const auto spec = make_spec(g, 3.0, 1, 0.1, {{cplx(0.5), GaussianProfile{{}, 2.0, 1.0}}});
  const auto path = sample_path(*spec.noise, 0.1, 50, 2);
  const Trajectory t = dense(test::gaussian_field(g), path, spec);
  const auto a = h1_identity(t, path, spec);
  const auto b = h1_identity(t, path, spec, 1.01 * g->nyquist_radius());
  EXPECT_NEAR(a.terminal_residual(), b.terminal_residual(), 1e-12);
  const auto c = h1_identity(t, path, spec, 0.5);
  EXPECT_NE(a.term("nonlinear_drift").back(), c.term("nonlinear_drift").back());
}

TEST(Identities, BitReproducible) {
  auto g = Grid::make(1, 64, 10.0);
  const auto spec = make_spec(g, 3.0, -1, 0.1, {{cplx(1.0), GaussianProfile{{}, 2.0, 1.0}}});
  auto run = [&] {
    const auto path = sample_path(*spec.noise, 0.1, 40, 77, 3);
    return hamiltonian_identity(dense(test::gaussian_field(g), path, spec), path, spec);
  };
  const auto a = run(), b = run();
  EXPECT_EQ(a.residual, b.residual);
  EXPECT_EQ(a.terms, b.terms);
}

TEST(Identities, ResidualsShrinkUnderRefinement) {
  auto g = Grid::make(1, 128, 16.0);
  const auto spec = make_spec(g, 3.0, -1, 0.2, {{cplx(1.0), GaussianProfile{{}, 2.0, 1.0}}});
  const std::size_t paths = 32, levels = 3;
  std::vector<std::array<std::vector<double>, 4>> res(levels);
  for (std::size_t p = 0; p < paths; ++p) {
    WienerPath path = sample_path(*spec.noise, 0.2, 50, 5, p);
    for (std::size_t l = 0; l < levels; ++l) {
      if (l) path = refine_path(path);
      const Trajectory t = dense(test::gaussian_field(g), path, spec);
      res[l][0].push_back(std::abs(mass_identity(t, path, *spec.noise).terminal_residual()));
      res[l][1].push_back(std::abs(hamiltonian_identity(t, path, spec).terminal_residual()));
      res[l][2].push_back(std::abs(lp_identity(t, path, spec).terminal_residual()));
      res[l][3].push_back(std::abs(h1_identity(t, path, spec).terminal_residual()));
    }
  }
  for (int k = 0; k < 4; ++k) {
    std::vector<double> med;
    for (std::size_t l = 0; l < levels; ++l) med.push_back(median(res[l][k]));
    for (std::size_t l = 1; l < levels; ++l) EXPECT_LE(med[l], med[l - 1]) << k;
    EXPECT_GE(fitted_order(med), 0.4) << k;
  }
}

TEST(Identities, CsvLayout) {
  auto g = Grid::make(1, 32, 8.0);
  const auto spec = make_spec(g, 3.0, 1, 0.1, {{cplx(0.5), ConstantProfile{1.0}}});
  const auto path = sample_path(*spec.noise, 0.1, 5, 0);
  const auto r = lp_identity(dense(test::gaussian_field(g), path, spec), path, spec);
  std::ostringstream out;
  write_csv(r, out);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,residual,dispersive_drift,ito_correction,martingale");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 6);
}

}  // namespace
