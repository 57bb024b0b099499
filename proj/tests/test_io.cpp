#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "snls/error.hpp"
#include "snls/io.hpp"
#include "support.hpp"

using namespace snls;

namespace {

const char* kMinimal = R"(
[problem]
d = 1
n = 64
L = 10
alpha = 3
lambda = -1
T = 1
dt = 0.01
)";

std::string expect_config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return {};
}

TEST(Config, MinimalConfigGetsDefaults) {
  const RunConfig c = parse_config(kMinimal);
  EXPECT_EQ(c.problem.d, 1);
  EXPECT_EQ(c.problem.n, 64u);
  EXPECT_EQ(c.run.stride, 1u);
  EXPECT_EQ(c.run.M, 1u);
  EXPECT_EQ(c.problem.scheme, Scheme::direct);
  EXPECT_EQ(c.problem.initial, InitialKind::gaussian);
  EXPECT_TRUE(c.noise.empty());
  EXPECT_EQ(c.run.h1_factor, 1e6);
}

TEST(Config, ErrorsNameTheOffendingKey) {
  EXPECT_NE(expect_config_error(std::string(kMinimal) + "bogus = 1\n").find("problem.bogus"), std::string::npos);
  std::string missing = kMinimal;
  missing.erase(missing.find("dt = 0.01"));
  EXPECT_NE(expect_config_error(missing).find("problem.dt"), std::string::npos);
  std::string bad_n = kMinimal;
  bad_n.replace(bad_n.find("n = 64"), 6, "n = 60");
  EXPECT_NE(expect_config_error(bad_n).find("problem.n"), std::string::npos);
  EXPECT_NE(expect_config_error(std::string(kMinimal) + "[run]\nM = x\n").find("run.M"), std::string::npos);
  EXPECT_NE(expect_config_error(std::string(kMinimal) + "[noise.1]\nmu_re = 1\n").find("noise.0"), std::string::npos);
  EXPECT_NE(expect_config_error(std::string(kMinimal) + "[extra]\n").find("extra"), std::string::npos);
  EXPECT_NE(expect_config_error(std::string(kMinimal) + "[noise.0]\nprofile = square\n").find("noise.0.profile"),
            std::string::npos);
}

TEST(Config, OutOfRangeRegimeRejectedBeforeCompute) {
  const std::string text = "[problem]\nd = 3\nn = 8\nL = 4\nalpha = 7\nlambda = 1\nT = 1\ndt = 0.1\n";
  const std::string msg = expect_config_error(text);
  EXPECT_NE(msg.find("out-of-range regime"), std::string::npos);
  EXPECT_NE(msg.find("problem.alpha = 7"), std::string::npos);
}

RunConfig random_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> small(0, 3);
  RunConfig c;
  auto& p = c.problem;
  p.d = 1 + small(rng) % 3;
  p.n = std::size_t{8} << small(rng);
  p.L = 1.0 + 30.0 * u(rng);
  p.lambda = u(rng) < 0.5 ? 1 : -1;
  // defocusing admits up to the energy exponent, focusing up to the mass one
  const double top = p.lambda == -1 ? (p.d == 3 ? 5.0 : 9.0) : 1.0 + 4.0 / p.d;
  p.alpha = 1.0 + (top - 1.0) * (0.05 + 0.9 * u(rng));
  const int steps = 1 + small(rng) * 17;
  p.dt = 1.0 / 64.0 * (1 + small(rng));
  p.T = p.dt * steps;
  p.scheme = static_cast<Scheme>(small(rng) % 3);
  p.initial = static_cast<InitialKind>(small(rng) % 3);
  p.amplitude = u(rng) * 3;
  p.width = 0.1 + u(rng);
  if (p.initial == InitialKind::plane_wave)
    for (int a = 0; a < p.d; ++a) p.modes.push_back(small(rng) - 1);
  const int modes = small(rng);
  for (int j = 0; j < modes; ++j) {
    NoiseBlock m;
    m.mu_re = u(rng) - 0.5;
    m.mu_im = u(rng) * 1e-3;
    m.profile = static_cast<ProfileKind>(small(rng) % 3);
    if (u(rng) < 0.5)
      for (int a = 0; a < p.d; ++a) m.center.push_back(u(rng));
    m.width = 0.5 + u(rng);
    m.height = u(rng);
    if (m.profile == ProfileKind::cosine)
      for (int a = 0; a < p.d; ++a) m.wavevector.push_back(u(rng) * 7);
    c.noise.push_back(m);
  }
  c.run.M = 1 + small(rng) * 100;
  c.run.seed = rng();
  c.run.stride = 1 + small(rng);
  c.run.out = "out_" + std::to_string(small(rng));
  c.run.h1_factor = 2.0 + u(rng) * 1e7;
  c.run.detect_blowup = u(rng) < 0.5;
  c.run.adaptive_dt = u(rng) < 0.5;
  c.run.levels = 1 + small(rng);
  c.run.drop_mu_tilde = u(rng) < 0.2;
  c.run.dispersion = u(rng) < 0.8;
  c.verify.identities = u(rng) < 0.5;
  c.verify.levels = 1 + small(rng);
  c.verify.cutoff = u(rng) < 0.5 ? 0.0 : u(rng) * 10;
  return c;
}

TEST(Config, RoundTripOnRandomConfigs) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 100; ++i) {
    const RunConfig c = random_config(rng);
    const std::string text = serialize_config(c);
    RunConfig back;
    ASSERT_NO_THROW(back = parse_config(text)) << text;
    EXPECT_EQ(back, c) << text;
    EXPECT_EQ(serialize_config(back), text);
  }
}

TEST(Config, BuildProblemAndInitialData) {
  RunConfig c = parse_config(std::string(kMinimal) +
                             "initial = plane-wave\nmodes = 2\n[noise.0]\nmu_im = 0.5\nprofile = constant\n");
  const Problem p = build_problem(c);
  EXPECT_EQ(p.steps, 100u);
  EXPECT_TRUE(p.noise->conservative());
  EXPECT_EQ(p.regime.tag, RegimeTag::defocusing_subcritical);
  const Field x = initial_datum(c, p.grid);
  EXPECT_NEAR(std::abs(x[5]), 1.0, 1e-15);
  EXPECT_NEAR(std::arg(x[1] / x[0]), 2 * M_PI * 2 / 10.0 * p.grid->spacing(), 1e-12);
}

TEST(Snapshot, RoundTripIsExact) {
  auto g = Grid::make(2, 16, 3.5);
  const Field u = test::random_smooth_field(g, 8);
  std::stringstream buf;
  write_snapshot(buf, u, 0.125);
  const std::string bytes = buf.str();
  EXPECT_EQ(bytes.size(), 4 + 2 + 2 + 4 + 8 + 8 + 16 * g->size());
  EXPECT_EQ(bytes.substr(0, 4), "SNLS");
  const Snapshot s = read_snapshot(buf);
  EXPECT_EQ(s.time, 0.125);
  EXPECT_TRUE(s.field.grid().same_shape(*g));
  for (std::size_t i = 0; i < g->size(); ++i) EXPECT_EQ(s.field[i], u[i]);
}

TEST(Snapshot, LittleEndianHeader) {
  auto g = Grid::make(1, 8, 2.0);
  std::stringstream buf;
  write_snapshot(buf, Field(g), 0.0);
  const std::string b = buf.str();
  EXPECT_EQ(static_cast<unsigned char>(b[4]), 1);  // version
  EXPECT_EQ(static_cast<unsigned char>(b[5]), 0);
  EXPECT_EQ(static_cast<unsigned char>(b[6]), 1);  // d
  EXPECT_EQ(static_cast<unsigned char>(b[8]), 8);  // n
  // L = 2.0 -> 0x4000000000000000
  EXPECT_EQ(static_cast<unsigned char>(b[19]), 0x40);
}

TEST(Snapshot, RejectsCorruptInput) {
  auto g = Grid::make(1, 8, 2.0);
  std::stringstream buf;
  write_snapshot(buf, Field(g), 0.0);
  std::string b = buf.str();
  std::stringstream shorter(b.substr(0, b.size() - 1));
  EXPECT_THROW(read_snapshot(shorter), InvalidArgument);
  std::stringstream longer(b + "x");
  EXPECT_THROW(read_snapshot(longer), InvalidArgument);
  b[0] = 'X';
  std::stringstream magic(b);
  EXPECT_THROW(read_snapshot(magic), InvalidArgument);
}

TEST(Snapshot, FileInitialDatum) {
  const auto dir = std::filesystem::temp_directory_path() / "snls_io_test";
  std::filesystem::create_directories(dir);
  RunConfig c = parse_config(kMinimal);
  const Problem p = build_problem(c);
  const Field u = test::random_smooth_field(p.grid, 2);
  write_snapshot(dir / "x.bin", u, 0.0);
  c.problem.initial = InitialKind::file;
  c.problem.file = (dir / "x.bin").string();
  const Field back = initial_datum(c, p.grid);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(back[i], u[i]);
  c.problem.n = 128;
  EXPECT_THROW(initial_datum(c, build_problem(c).grid), ConfigError);
}

TEST(Summary, KeyValueLines) {
  Summary s;
  s.set("a", 1.5);
  s.set("b", true);
  s.set("c", std::size_t{3});
  s.set("a", 0.1);
  std::ostringstream out;
  s.write(out);
  EXPECT_EQ(out.str(), "a=0.1\nb=true\nc=3\n");
  EXPECT_EQ(s.get("b"), "true");
  EXPECT_FALSE(s.get("z").has_value());
}

TEST(DiagnosticsCsv, Header) {
  Diagnostics d;
  d.time = {0.0};
  d.mass = {1.0};
  d.hamiltonian = {2.0};
  d.h1 = {3.0};
  d.lp = {4.0};
  std::ostringstream out;
  write_diagnostics_csv(d, out);
  EXPECT_EQ(out.str(), "t,mass,hamiltonian,h1,l_alpha_plus_1\n0,1,2,3,4\n");
}

}  // namespace
