#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "snls/error.hpp"
#include "snls/io.hpp"

namespace snls {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
  throw ConfigError(key + " = " + value + ": " + why);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
    bad(key, v, "expected a finite number");
  return out;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad(key, v, "expected an integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  bad(key, v, "expected true/false");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (v.empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  return out;
}

std::string list_string(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::direct: return "direct";
    case Scheme::rescaled: return "rescaled";
    case Scheme::both: return "both";
  }
  return "direct";
}

const char* initial_name(InitialKind k) {
  switch (k) {
    case InitialKind::gaussian: return "gaussian";
    case InitialKind::soliton: return "soliton";
    case InitialKind::plane_wave: return "plane-wave";
    case InitialKind::file: return "file";
  }
  return "gaussian";
}

const char* profile_name(ProfileKind k) {
  switch (k) {
    case ProfileKind::gaussian: return "gaussian";
    case ProfileKind::constant: return "constant";
    case ProfileKind::cosine: return "cosine";
  }
  return "gaussian";
}

using Section = std::map<std::string, std::string>;

// Pops every key of a section through typed setters; leftovers are unknown keys.
class Reader {
 public:
  Reader(std::string prefix, Section section) : prefix_(std::move(prefix)), s_(std::move(section)) {}

  std::optional<std::string> take(const std::string& key, bool required = false) {
    auto it = s_.find(key);
    if (it == s_.end()) {
      if (required) throw ConfigError("missing required key " + name(key));
      return std::nullopt;
    }
    std::string v = it->second;
    s_.erase(it);
    return v;
  }
  std::string name(const std::string& key) const { return prefix_ + "." + key; }

  void num(const std::string& key, double& out, bool required = false) {
    if (auto v = take(key, required)) out = to_double(name(key), *v);
  }
  template <class Int>
  void integer(const std::string& key, Int& out, bool required = false) {
    if (auto v = take(key, required)) out = to_int<Int>(name(key), *v);
  }
  void flag(const std::string& key, bool& out) {
    if (auto v = take(key)) out = to_bool(name(key), *v);
  }
  void list(const std::string& key, std::vector<double>& out) {
    if (auto v = take(key)) out = to_list(name(key), *v);
  }
  void text(const std::string& key, std::string& out) {
    if (auto v = take(key)) out = *v;
  }
  template <class Enum>
  void choice(const std::string& key, Enum& out, const std::vector<std::pair<const char*, Enum>>& options) {
    auto v = take(key);
    if (!v) return;
    for (const auto& [label, value] : options)
      if (*v == label) {
        out = value;
        return;
      }
    bad(name(key), *v, "unrecognised value");
  }
  void finish() const {
    if (!s_.empty()) throw ConfigError("unknown key " + name(s_.begin()->first));
  }

 private:
  std::string prefix_;
  Section s_;
};

void validate(RunConfig& c) {
  const auto& p = c.problem;
  if (p.d < 1 || p.d > 3) bad("problem.d", std::to_string(p.d), "dimension must be 1, 2 or 3");
  if (p.n < 8 || (p.n & (p.n - 1)) != 0)
    bad("problem.n", std::to_string(p.n), "must be a power of two >= 8");
  if (!(p.L > 0.0)) bad("problem.L", format_double(p.L), "must be positive");
  if (p.lambda != 1 && p.lambda != -1)
    bad("problem.lambda", std::to_string(p.lambda), "must be +1 or -1");
  if (!(p.T > 0.0)) bad("problem.T", format_double(p.T), "must be positive");
  if (!(p.dt > 0.0) || p.dt > p.T) bad("problem.dt", format_double(p.dt), "must be in (0, T]");
  const double steps = p.T / p.dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
    bad("problem.dt", format_double(p.dt), "T / dt must be an integer");
  if (p.initial == InitialKind::plane_wave && p.modes.size() != static_cast<std::size_t>(p.d))
    bad("problem.modes", list_string(p.modes), "plane-wave needs one lattice index per axis");
  if (p.initial == InitialKind::file && p.file.empty())
    throw ConfigError("missing required key problem.file (initial = file)");
  if (!(p.width > 0.0)) bad("problem.width", format_double(p.width), "must be positive");

  for (std::size_t j = 0; j < c.noise.size(); ++j) {
    const auto& m = c.noise[j];
    const std::string pre = "noise." + std::to_string(j) + ".";
    if (m.profile == ProfileKind::gaussian && !(m.width > 0.0))
      bad(pre + "width", format_double(m.width), "must be positive");
    if (!m.center.empty() && m.center.size() != static_cast<std::size_t>(p.d))
      bad(pre + "center", list_string(m.center), "needs one entry per axis");
    if (m.profile == ProfileKind::cosine && m.wavevector.size() != static_cast<std::size_t>(p.d))
      bad(pre + "wavevector", list_string(m.wavevector), "needs one entry per axis");
  }

  const auto& r = c.run;
  if (r.M < 1) bad("run.M", std::to_string(r.M), "must be >= 1");
  if (r.stride < 1) bad("run.stride", std::to_string(r.stride), "must be >= 1");
  if (r.checkpoints < 1) bad("run.checkpoints", std::to_string(r.checkpoints), "must be >= 1");
  if (r.levels < 1) bad("run.levels", std::to_string(r.levels), "must be >= 1");
  if (!(r.h1_factor > 1.0)) bad("run.h1_factor", format_double(r.h1_factor), "must exceed 1");
  if (!(r.spacetime_factor > 1.0))
    bad("run.spacetime_factor", format_double(r.spacetime_factor), "must exceed 1");
  if (c.verify.levels < 1) bad("verify.levels", std::to_string(c.verify.levels), "must be >= 1");
  if (c.verify.cutoff < 0.0) bad("verify.cutoff", format_double(c.verify.cutoff), "must be >= 0");

  if (classify(p.d, p.alpha, p.lambda).tag == RegimeTag::out_of_range)
    bad("problem.alpha", format_double(p.alpha),
        "out-of-range regime for d = " + std::to_string(p.d) + ", lambda = " + std::to_string(p.lambda));
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  std::map<std::string, Section> sections;
  std::vector<std::string> order;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      current = trim(line.substr(1, line.size() - 2));
      if (sections.count(current)) throw ConfigError("duplicate section [" + current + "]");
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    if (current.empty()) throw ConfigError("line " + std::to_string(line_no) + ": key outside a section");
    const std::string key = trim(line.substr(0, eq));
    if (sections[current].count(key)) throw ConfigError("duplicate key " + current + "." + key);
    sections[current][key] = trim(line.substr(eq + 1));
  }

  RunConfig c;
  std::map<std::size_t, NoiseBlock> noise;
  if (!sections.count("problem")) throw ConfigError("missing required section [problem]");
  for (auto& [name, sec] : sections) {
    if (name == "problem") {
      Reader r("problem", sec);
      auto& p = c.problem;
      r.integer("d", p.d, true);
      r.integer("n", p.n, true);
      r.num("L", p.L, true);
      r.num("alpha", p.alpha, true);
      r.integer("lambda", p.lambda, true);
      r.num("T", p.T, true);
      r.num("dt", p.dt, true);
      r.choice<Scheme>("scheme", p.scheme,
                       {{"direct", Scheme::direct}, {"rescaled", Scheme::rescaled}, {"both", Scheme::both}});
      r.choice<InitialKind>("initial", p.initial,
                            {{"gaussian", InitialKind::gaussian},
                             {"soliton", InitialKind::soliton},
                             {"plane-wave", InitialKind::plane_wave},
                             {"file", InitialKind::file}});
      r.num("amplitude", p.amplitude);
      r.num("width", p.width);
      r.list("modes", p.modes);
      r.text("file", p.file);
      r.finish();
    } else if (name.rfind("noise.", 0) == 0) {
      const std::string idx = name.substr(6);
      const auto j = to_int<std::size_t>("[" + name + "]", idx);
      Reader r(name, sec);
      NoiseBlock m;
      r.num("mu_re", m.mu_re);
      r.num("mu_im", m.mu_im);
      r.choice<ProfileKind>("profile", m.profile,
                            {{"gaussian", ProfileKind::gaussian},
                             {"constant", ProfileKind::constant},
                             {"cosine", ProfileKind::cosine}});
      r.list("center", m.center);
      r.num("width", m.width);
      r.num("height", m.height);
      r.list("wavevector", m.wavevector);
      r.finish();
      noise[j] = m;
    } else if (name == "run") {
      Reader r("run", sec);
      auto& b = c.run;
      r.integer("M", b.M);
      r.integer("seed", b.seed);
      r.integer("stride", b.stride);
      r.text("out", b.out);
      r.num("h1_factor", b.h1_factor);
      r.num("spacetime_factor", b.spacetime_factor);
      r.flag("detect_blowup", b.detect_blowup);
      r.flag("adaptive_dt", b.adaptive_dt);
      r.integer("checkpoints", b.checkpoints);
      r.integer("levels", b.levels);
      r.integer("threads", b.threads);
      r.flag("drop_mu_tilde", b.drop_mu_tilde);
      r.flag("dispersion", b.dispersion);
      r.flag("nonlinearity", b.nonlinearity);
      r.flag("snapshots", b.snapshots);
      r.finish();
    } else if (name == "verify") {
      Reader r("verify", sec);
      r.flag("identities", c.verify.identities);
      r.integer("levels", c.verify.levels);
      r.num("cutoff", c.verify.cutoff);
      r.finish();
    } else {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
  std::size_t expect = 0;
  for (auto& [j, m] : noise) {
    if (j != expect) throw ConfigError("noise sections must be numbered 0, 1, 2, ... (missing [noise." + std::to_string(expect) + "])");
    c.noise.push_back(m);
    ++expect;
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream o;
  const auto& p = c.problem;
  o << "[problem]\n"
    << "d = " << p.d << "\nn = " << p.n << "\nL = " << format_double(p.L)
    << "\nalpha = " << format_double(p.alpha) << "\nlambda = " << p.lambda
    << "\nT = " << format_double(p.T) << "\ndt = " << format_double(p.dt)
    << "\nscheme = " << scheme_name(p.scheme) << "\ninitial = " << initial_name(p.initial)
    << "\namplitude = " << format_double(p.amplitude) << "\nwidth = " << format_double(p.width)
    << "\nmodes = " << list_string(p.modes) << "\nfile = " << p.file << "\n";
  for (std::size_t j = 0; j < c.noise.size(); ++j) {
    const auto& m = c.noise[j];
    o << "\n[noise." << j << "]\n"
      << "mu_re = " << format_double(m.mu_re) << "\nmu_im = " << format_double(m.mu_im)
      << "\nprofile = " << profile_name(m.profile) << "\ncenter = " << list_string(m.center)
      << "\nwidth = " << format_double(m.width) << "\nheight = " << format_double(m.height)
      << "\nwavevector = " << list_string(m.wavevector) << "\n";
  }
  const auto& r = c.run;
  auto b = [](bool v) { return v ? "true" : "false"; };
  o << "\n[run]\n"
    << "M = " << r.M << "\nseed = " << r.seed << "\nstride = " << r.stride << "\nout = " << r.out
    << "\nh1_factor = " << format_double(r.h1_factor)
    << "\nspacetime_factor = " << format_double(r.spacetime_factor)
    << "\ndetect_blowup = " << b(r.detect_blowup) << "\nadaptive_dt = " << b(r.adaptive_dt)
    << "\ncheckpoints = " << r.checkpoints << "\nlevels = " << r.levels << "\nthreads = " << r.threads
    << "\ndrop_mu_tilde = " << b(r.drop_mu_tilde) << "\ndispersion = " << b(r.dispersion)
    << "\nnonlinearity = " << b(r.nonlinearity) << "\nsnapshots = " << b(r.snapshots) << "\n";
  o << "\n[verify]\n"
    << "identities = " << b(c.verify.identities) << "\nlevels = " << c.verify.levels
    << "\ncutoff = " << format_double(c.verify.cutoff) << "\n";
  return o.str();
}

Problem build_problem(const RunConfig& c) {
  const auto& p = c.problem;
  Problem out;
  out.grid = Grid::make(p.d, p.n, p.L);
  std::vector<NoiseMode> modes;
  for (const auto& m : c.noise) {
    Profile prof;
    switch (m.profile) {
      case ProfileKind::gaussian: prof = GaussianProfile{m.center, m.width, m.height}; break;
      case ProfileKind::constant: prof = ConstantProfile{m.height}; break;
      case ProfileKind::cosine: prof = CosineProfile{m.wavevector, m.height}; break;
    }
    modes.push_back({cplx(m.mu_re, m.mu_im), prof});
  }
  out.noise = std::make_shared<const NoiseModel>(NoiseModel::build(std::move(modes), out.grid));
  out.spec.alpha = p.alpha;
  out.spec.lambda = p.lambda;
  out.spec.horizon = p.T;
  out.spec.noise = out.noise;
  out.spec.flags.dispersion = c.run.dispersion;
  out.spec.flags.nonlinearity = c.run.nonlinearity;
  out.spec.flags.drop_mu_tilde = c.run.drop_mu_tilde;
  out.regime = classify(p.d, p.alpha, p.lambda);
  out.steps = static_cast<std::size_t>(std::llround(p.T / p.dt));
  return out;
}

Field initial_datum(const RunConfig& c, const GridPtr& grid) {
  const auto& p = c.problem;
  const double a = p.amplitude, w = p.width;
  switch (p.initial) {
    case InitialKind::gaussian:
      return Field::from_function(grid, [&](std::span<const double> xi) {
        double r2 = 0.0;
        for (double v : xi) r2 += v * v;
        return cplx(a * std::exp(-r2 / (w * w)), 0.0);
      });
    case InitialKind::soliton:
      return Field::from_function(grid, [&](std::span<const double> xi) {
        double r2 = 0.0;
        for (double v : xi) r2 += v * v;
        return cplx(a * std::numbers::sqrt2 / std::cosh(std::sqrt(r2) / w), 0.0);
      });
    case InitialKind::plane_wave:
      return Field::from_function(grid, [&](std::span<const double> xi) {
        double phase = 0.0;
        for (std::size_t i = 0; i < xi.size(); ++i)
          phase += 2.0 * std::numbers::pi * p.modes[i] / p.L * xi[i];
        return a * std::polar(1.0, phase);
      });
    case InitialKind::file: {
      Snapshot s = read_snapshot(std::filesystem::path(p.file));
      if (!s.field.grid().same_shape(*grid))
        throw ConfigError("problem.file = " + p.file + ": snapshot grid does not match [problem]");
      return Field(grid, s.field.values());
    }
  }
  throw ConfigError("problem.initial: unsupported");
}

}  // namespace snls
