#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  fs::path out;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "snls_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

CliRun run_cli(const std::string& command, const std::string& config_text, const std::string& name,
            const std::string& extra = "") {
  const fs::path dir = scratch(name);
  const fs::path cfg = dir / "config.ini";
  std::ofstream(cfg) << config_text;
  const fs::path out = dir / "out";
  const std::string cmd = std::string(SNLS_CLI_PATH) + " " + command + " --config " + cfg.string() + " --out " +
                          out.string() + " " + extra + " > " + (dir / "stdout.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::map<std::string, std::string> summary(const fs::path& out) {
  std::map<std::string, std::string> m;
  std::ifstream in(out / "summary.txt");
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) m[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return m;
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string* header = nullptr) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

const char* kSoliton = R"([problem]
d = 1
n = 512
L = 40
alpha = 3
lambda = 1
T = 1
dt = 1e-3
initial = soliton
[run]
stride = 250
)";

TEST(Cli, SimulateSolitonExitsCleanly) {
  const CliRun r = run_cli("simulate", kSoliton, "soliton");
  ASSERT_EQ(r.code, 0);
  std::string header;
  const auto rows = read_csv(r.out / "diagnostics.csv", &header);
  EXPECT_EQ(header, "t,mass,hamiltonian,h1,l_alpha_plus_1");
  ASSERT_EQ(rows.size(), 1001u);
  for (const auto& row : rows) EXPECT_NEAR(row[2], rows[0][2], 1e-6);
  const auto s = summary(r.out);
  EXPECT_EQ(s.at("status"), "finished");
  EXPECT_EQ(s.at("exit_code"), "0");
  EXPECT_EQ(s.at("boundary_valid"), "true");
  int snaps = 0;
  for (const auto& e : fs::directory_iterator(r.out / "snapshots")) {
    EXPECT_EQ(fs::file_size(e.path()), 4 + 2 + 2 + 4 + 8 + 8 + 16 * 512u);
    ++snaps;
  }
  EXPECT_EQ(snaps, 5);
}

TEST(Cli, SimulateIsReproducible) {
  const std::string cfg = std::string(kSoliton) + "snapshots = false\n[noise.0]\nmu_re = 0.5\nmu_im = 0.2\n";
  const CliRun a = run_cli("simulate", cfg, "repro_a", "--seed 42");
  const CliRun b = run_cli("simulate", cfg, "repro_b", "--seed 42");
  const CliRun c = run_cli("simulate", cfg, "repro_c", "--seed 43");
  ASSERT_EQ(a.code, 0);
  std::ifstream fa(a.out / "diagnostics.csv"), fb(b.out / "diagnostics.csv"), fc(c.out / "diagnostics.csv");
  const std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {}),
      sc((std::istreambuf_iterator<char>(fc)), {});
  EXPECT_EQ(sa, sb);
  EXPECT_NE(sa, sc);
  EXPECT_EQ(summary(a.out).at("seed"), "42");
}

TEST(Cli, SimulateBlowupExitsWithTwo) {
  const char* cfg = R"([problem]
d = 1
n = 512
L = 20
alpha = 5
lambda = 1
T = 1
dt = 1e-3
amplitude = 3
[run]
stride = 1000
h1_factor = 10
adaptive_dt = true
)";
  const CliRun r = run_cli("simulate", cfg, "blowup");
  EXPECT_EQ(r.code, 2);
  const auto s = summary(r.out);
  EXPECT_EQ(s.at("status"), "blowup");
  EXPECT_LT(std::stod(s.at("blowup_time")), 1.0);
}

TEST(Cli, VerifyIdentitiesOnConservativeConfig) {
  const char* cfg = R"([problem]
d = 1
n = 64
L = 6.283185307179586
alpha = 3
lambda = -1
T = 0.5
dt = 1e-3
initial = plane-wave
modes = 2
[noise.0]
mu_im = 1
profile = constant
height = 0.5
[run]
M = 2
[verify]
levels = 1
)";
  const CliRun r = run_cli("verify-identities", cfg, "verify");
  ASSERT_EQ(r.code, 0);
  const auto s = summary(r.out);
  for (const char* k : {"mass_residual", "hamiltonian_residual", "lp_residual", "h1_residual"})
    EXPECT_LE(std::stod(s.at(k)), 1e-10) << k;
  EXPECT_EQ(s.at("vanishing_terms_zero"), "true");
  EXPECT_TRUE(fs::exists(r.out / "identity_hamiltonian.csv"));
  EXPECT_TRUE(fs::exists(r.out / "diagnostics.csv"));
}

TEST(Cli, EnsembleConvergenceAndBlowupScanRun) {
  const char* cfg = R"([problem]
d = 1
n = 64
L = 16
alpha = 3
lambda = -1
T = 0.2
dt = 0.01
[noise.0]
mu_re = 0.5
width = 2
[run]
M = 8
checkpoints = 4
[verify]
levels = 3
)";
  const CliRun e = run_cli("ensemble", cfg, "ensemble");
  ASSERT_EQ(e.code, 0);
  EXPECT_TRUE(fs::exists(e.out / "ensemble.csv"));
  EXPECT_EQ(summary(e.out).at("blowup_paths"), "0");
  const CliRun c = run_cli("convergence", cfg, "convergence");
  ASSERT_EQ(c.code, 0);
  EXPECT_TRUE(summary(c.out).count("order"));
  const CliRun b = run_cli("blowup-scan", cfg, "scan");
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(summary(b.out).at("blowup_levels"), "0");
}

TEST(Cli, ErrorsExitWithOne) {
  EXPECT_EQ(run_cli("simulate", "[problem]\nd = 1\n", "bad_config").code, 1);
  EXPECT_EQ(run_cli("simulate", "[problem]\nd = 3\nn = 8\nL = 4\nalpha = 7\nlambda = 1\nT = 1\ndt = 0.1\n",
                    "out_of_range")
                .code,
            1);
  const fs::path dir = scratch("no_file");
  const int status = std::system((std::string(SNLS_CLI_PATH) + " simulate --config " + (dir / "missing.ini").string() +
                                  " > /dev/null 2>&1")
                                     .c_str());
  EXPECT_EQ(WEXITSTATUS(status), 1);
  const int usage = std::system((std::string(SNLS_CLI_PATH) + " frobnicate > /dev/null 2>&1").c_str());
  EXPECT_EQ(WEXITSTATUS(usage), 1);
}

}  // namespace
