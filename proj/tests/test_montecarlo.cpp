#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "snls/error.hpp"
#include "snls/functionals.hpp"
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

EnsembleConfig small_config(std::size_t paths, std::size_t threads = 1) {
  EnsembleConfig c;
  c.paths = paths;
  c.seed = 17;
  c.steps = 40;
  c.levels = 2;
  c.checkpoints = 4;
  c.threads = threads;
  return c;
}

bool same_report(const EnsembleReport& a, const EnsembleReport& b) {
  if (a.levels.size() != b.levels.size() || a.time != b.time) return false;
  for (std::size_t l = 0; l < a.levels.size(); ++l)
    for (std::size_t o = 0; o < kObservableCount; ++o) {
      const auto &x = a.levels[l].stats[o], &y = b.levels[l].stats[o];
      if (x.mean != y.mean || x.variance != y.variance) return false;
      if (a.levels[l].sup_energy != b.levels[l].sup_energy) return false;
    }
  return true;
}

TEST(Ensemble, ConfigValidation) {
  auto g = Grid::make(1, 32, 10.0);
  const auto spec = make_spec(g, 3.0, -1, 0.2);
  const Field x = test::gaussian_field(g);
  EnsembleConfig c = small_config(1);
  EXPECT_THROW(run_ensemble(x, spec, c), InvalidArgument);
  c = small_config(4);
  c.checkpoints = 7;
  EXPECT_THROW(run_ensemble(x, spec, c), InvalidArgument);
}

TEST(Ensemble, DeterministicLimitHasZeroVariance) {
  auto g = Grid::make(1, 64, 10.0);
  const auto spec = make_spec(g, 3.0, -1, 0.2);
  const auto rep = run_ensemble(test::gaussian_field(g), spec, small_config(5));
  for (const auto& lvl : rep.levels)
    for (const auto& st : lvl.stats)
      for (double v : st.variance) EXPECT_LE(v, 1e-28);
  EXPECT_EQ(rep.blowup_paths, 0u);
  const MomentResult mm = moment_monitor(rep, 2.0);
  EXPECT_FALSE(mm.divergent);
  EXPECT_TRUE(mm.finite);
  EXPECT_TRUE(mm.stable);
  EXPECT_NEAR(mm.sup_mass_moment[0], rep.initial[0], 1e-10);
}

TEST(Ensemble, IndependentOfThreadCount) {
  auto g = Grid::make(1, 64, 10.0);
  const auto spec = make_spec(g, 3.0, -1, 0.2, {{cplx(0.8), GaussianProfile{{}, 2.0, 1.0}}});
  const Field x = test::gaussian_field(g);
  const auto a = run_ensemble(x, spec, small_config(9, 1));
  const auto b = run_ensemble(x, spec, small_config(9, 3));
  const auto c = run_ensemble(x, spec, small_config(9, 8));
  EXPECT_TRUE(same_report(a, b));
  EXPECT_TRUE(same_report(a, c));
}

TEST(Ensemble, ThreadWidthHonoursEnvironment) {
  ::setenv("SNLS_THREADS", "2", 1);
  EXPECT_EQ(resolve_threads(0), 2u);
  EXPECT_EQ(resolve_threads(5), 2u);
  EXPECT_EQ(resolve_threads(1), 1u);
  ::unsetenv("SNLS_THREADS");
  EXPECT_GE(resolve_threads(0), 1u);
  EXPECT_EQ(resolve_threads(3), 3u);
}

TEST(ParallelFor, RethrowsLowestFailingIndex) {
  try {
    parallel_for(10, 3, [](std::size_t i) {
      if (i == 4 || i == 7) throw InvalidArgument("fail " + std::to_string(i));
    });
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_STREQ(e.what(), "fail 4");
  }
}

TEST(Ensemble, ConfidenceWidthFollowsInverseSqrtLaw) {
  auto g = Grid::make(1, 32, 10.0);
  const auto spec = make_spec(g, 3.0, -1, 0.2, {{cplx(1.0), GaussianProfile{{}, 2.0, 1.0}}});
  EnsembleConfig c = small_config(200);
  c.levels = 1;
  c.steps = 20;
  const Field x = test::gaussian_field(g);
  const auto a = run_ensemble(x, spec, c);
  c.paths = 400;
  const auto b = run_ensemble(x, spec, c);
  const double ratio = b.stats(Observable::mass).ci_half_width(4) / a.stats(Observable::mass).ci_half_width(4);
  EXPECT_NEAR(ratio, 1.0 / std::sqrt(2.0), 0.2 / std::sqrt(2.0));
}

TEST(Martingale, ConservativeModelPassesExactly) {
  auto g = Grid::make(1, 32, 10.0);
  const auto spec = make_spec(g, 3.0, 1, 0.2, {{cplx(0, 1.0), GaussianProfile{{}, 2.0, 1.0}}});
  const auto rep = run_ensemble(test::gaussian_field(g), spec, small_config(100));
  const auto mt = martingale_test(rep);
  EXPECT_TRUE(mt.passed);
  EXPECT_EQ(mt.max_z, 0.0);
}

TEST(Martingale, DetectsMissingCorrection) {
  auto g = Grid::make(1, 32, 10.0);
  auto spec = make_spec(g, 3.0, -1, 0.5, {{cplx(1.0), GaussianProfile{{}, 2.0, 1.0}}});
  EnsembleConfig c = small_config(800);
  c.steps = 40;
  c.checkpoints = 10;
  const Field x = test::gaussian_field(g);
  EXPECT_TRUE(martingale_test(run_ensemble(x, spec, c)).passed);
  spec.flags.drop_mu_tilde = true;
  const auto bad = martingale_test(run_ensemble(x, spec, c));
  EXPECT_FALSE(bad.passed);
  EXPECT_GT(bad.max_z, 5.0);
}

TEST(Moments, BlowupIsReportedAsDivergence) {
  auto g = Grid::make(1, 256, 20.0);
  const auto spec = make_spec(g, 5.0, 1, 0.2, {{cplx(0, 0.1), GaussianProfile{{}, 2.0, 1.0}}});
  EnsembleConfig c = small_config(3);
  c.steps = 400;
  c.levels = 1;
  c.thresholds.h1_factor = 10.0;
  const auto rep = run_ensemble(test::gaussian_field(g, 3.0), spec, c);
  EXPECT_EQ(rep.blowup_paths, 3u);
  EXPECT_TRUE(rep.outcomes[0].blowup());
  const MomentResult mm = moment_monitor(rep, 2.0);
  EXPECT_TRUE(mm.divergent);
  EXPECT_TRUE(mm.sup_mass_moment.empty());
}

TEST(Moments, ConservativeFocusingSubcriticalIsStable) {
  auto g = Grid::make(1, 64, 16.0);
  const auto spec = make_spec(g, 3.0, 1, 0.3, {{cplx(0, 0.5), GaussianProfile{{}, 3.0, 1.0}}});
  const auto rep = run_ensemble(test::gaussian_field(g), spec, small_config(16));
  const MomentResult mm = moment_monitor(rep, 4.0);
  EXPECT_TRUE(mm.finite);
  EXPECT_TRUE(mm.stable);
  EXPECT_NEAR(mm.sup_mass_moment[0], std::pow(rep.initial[0], 2.0), 1e-9);
}

TEST(Convergence, FitAndGuards) {
  EXPECT_NEAR(fitted_order({1.0, 0.5, 0.25, 0.125}), 1.0, 1e-14);
  EXPECT_NEAR(fitted_order({1.0, 0.25, 1.0 / 16}), 2.0, 1e-14);
  auto g = Grid::make(1, 32, 10.0);
  const auto spec = make_spec(g, 3.0, -1, 0.2);
  ConvergenceConfig c;
  c.levels = 2;
  EXPECT_THROW(convergence_order(test::gaussian_field(g), spec, c), InvalidArgument);
}

TEST(Convergence, LinearEquationWithExactNoiseFactor) {
  auto g = Grid::make(1, 64, 16.0);
  auto spec = make_spec(g, 3.0, 1, 0.25, {{cplx(0.7), GaussianProfile{{}, 2.0, 1.0}}});
  spec.flags.nonlinearity = false;
  ConvergenceConfig c;
  c.paths = 8;
  c.steps = 10;
  c.levels = 5;
  const auto r = convergence_order(test::gaussian_field(g), spec, c);
  EXPECT_FALSE(r.inconclusive);
  EXPECT_GE(r.order, 0.9);
}

TEST(Convergence, FullEquationOrderIsReported) {
  auto g = Grid::make(1, 64, 16.0);
  const auto spec = make_spec(g, 3.0, 1, 0.25, {{cplx(0.7, 0.3), GaussianProfile{{}, 2.0, 1.0}}});
  ConvergenceConfig c;
  c.paths = 8;
  c.steps = 10;
  c.levels = 4;
  const auto r = convergence_order(test::gaussian_field(g), spec, c);
  EXPECT_EQ(r.errors.size(), 3u);
  EXPECT_TRUE(std::isfinite(r.order));
  RecordProperty("full_equation_order", std::to_string(r.order));
}

TEST(Continuity, RejectsZeroPerturbation) {
  auto g = Grid::make(1, 32, 10.0);
  const auto spec = make_spec(g, 3.0, 1, 0.1);
  EXPECT_THROW(continuity_probe(test::gaussian_field(g), test::gaussian_field(g), {0.0, 1e-3}, spec, small_config(2)),
               InvalidArgument);
}

TEST(Continuity, IdenticalTrajectoriesForZeroShift) {
  auto g = Grid::make(1, 64, 10.0);
  const auto spec = make_spec(g, 3.0, 1, 0.1);
  const auto r = continuity_probe(test::gaussian_field(g), test::gaussian_field(g, 0.1, 2.0), {1e-2, 1e-3, 1e-4},
                                  spec, small_config(2));
  EXPECT_TRUE(r.bounded);
  for (const auto& row : r.ratios)
    for (double v : row) EXPECT_GT(v, 0.0);
}

TEST(Continuity, BlowupIsARegimeError) {
  auto g = Grid::make(1, 256, 20.0);
  const auto spec = make_spec(g, 5.0, 1, 0.2);
  EnsembleConfig c = small_config(1);
  c.steps = 400;
  c.thresholds.h1_factor = 10.0;
  EXPECT_THROW(continuity_probe(test::gaussian_field(g, 3.0), test::gaussian_field(g), {1e-3}, spec, c), RegimeError);
}

TEST(Ensemble, CsvHasOneRowPerLevelAndCheckpoint) {
  auto g = Grid::make(1, 32, 10.0);
  const auto spec = make_spec(g, 3.0, -1, 0.2);
  const auto rep = run_ensemble(test::gaussian_field(g), spec, small_config(2));
  std::ostringstream out;
  write_csv(rep, out);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("level,t,mass_mean,mass_var,mass_se,hamiltonian_mean", 0), 0u);
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 2 * 5);
}

}  // namespace
