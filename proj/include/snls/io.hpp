#pragma once

// Run configuration (sectioned key = value text), binary field snapshots,
// diagnostics CSV and the key=value summary block.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "snls/dynamics.hpp"
#include "snls/noise.hpp"
#include "snls/regime.hpp"

namespace snls {

enum class Scheme { direct, rescaled, both };
enum class InitialKind { gaussian, soliton, plane_wave, file };
enum class ProfileKind { gaussian, constant, cosine };

struct ProblemBlock {
  int d = 1;
  std::size_t n = 0;
  double L = 0.0;
  double alpha = 0.0;
  int lambda = 0;
  double T = 0.0;
  double dt = 0.0;
  Scheme scheme = Scheme::direct;
  InitialKind initial = InitialKind::gaussian;
  double amplitude = 1.0;
  double width = 1.0;
  /// Plane-wave lattice indices (k_a = 2 pi m_a / L), one per axis.
  std::vector<double> modes;
  std::string file;
  bool operator==(const ProblemBlock&) const = default;
};

struct NoiseBlock {
  double mu_re = 0.0;
  double mu_im = 0.0;
  ProfileKind profile = ProfileKind::gaussian;
  std::vector<double> center;
  double width = 1.0;
  double height = 1.0;
  std::vector<double> wavevector;
  bool operator==(const NoiseBlock&) const = default;
};

struct RunBlock {
  std::size_t M = 1;
  std::uint64_t seed = 0;
  std::size_t stride = 1;
  std::string out = "snls_out";
  double h1_factor = 1e6;
  double spacetime_factor = 1e6;
  bool detect_blowup = true;
  bool adaptive_dt = false;
  std::size_t checkpoints = 10;
  std::size_t levels = 2;
  std::size_t threads = 0;
  bool drop_mu_tilde = false;
  bool dispersion = true;
  bool nonlinearity = true;
  bool snapshots = true;
  bool operator==(const RunBlock&) const = default;
};

struct VerifyBlock {
  bool identities = true;
  std::size_t levels = 3;
  /// Theta_m cutoff for the H^1 identity; 0 means none.
  double cutoff = 0.0;
  bool operator==(const VerifyBlock&) const = default;
};

struct RunConfig {
  ProblemBlock problem;
  std::vector<NoiseBlock> noise;
  RunBlock run;
  VerifyBlock verify;
  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError naming the offending key (unknown key, missing
/// required key, malformed value) or the out-of-range regime.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& config);

struct Problem {
  GridPtr grid;
  std::shared_ptr<const NoiseModel> noise;
  ProblemSpec spec;
  Regime regime;
  std::size_t steps = 0;
};

Problem build_problem(const RunConfig& config);
Field initial_datum(const RunConfig& config, const GridPtr& grid);

struct Snapshot {
  Field field;
  double time = 0.0;
};

void write_snapshot(std::ostream& out, const Field& field, double time);
void write_snapshot(const std::filesystem::path& path, const Field& field, double time);
/// Throws InvalidArgument on a bad magic, version or payload length.
Snapshot read_snapshot(std::istream& in);
Snapshot read_snapshot(const std::filesystem::path& path);

/// Columns: t, mass, hamiltonian, h1, l_alpha_plus_1.
void write_diagnostics_csv(const Diagnostics& diagnostics, std::ostream& out);

/// Ordered key=value lines.
class Summary {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::int64_t value);
  void set(const std::string& key, std::size_t value);
  void set(const std::string& key, int value) { set(key, static_cast<std::int64_t>(value)); }
  void set(const std::string& key, bool value);
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::optional<std::string> get(const std::string& key) const;
  void write(std::ostream& out) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace snls
