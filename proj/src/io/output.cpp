#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "snls/error.hpp"
#include "snls/io.hpp"

namespace snls {
namespace {

constexpr char kMagic[4] = {'S', 'N', 'L', 'S'};
constexpr std::uint16_t kVersion = 1;

template <class T>
void put_le(std::ostream& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
  const U bits = std::bit_cast<U>(value);
  std::array<char, sizeof(T)> buf;
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(buf.data(), buf.size());
}

template <class T>
T get_le(std::istream& in, const char* what) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
  std::array<unsigned char, sizeof(T)> buf;
  if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size()))
    throw InvalidArgument(std::string("snapshot truncated in ") + what);
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(buf[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

}  // namespace

void write_snapshot(std::ostream& out, const Field& field, double time) {
  const Grid& g = field.grid();
  out.write(kMagic, 4);
  put_le<std::uint16_t>(out, kVersion);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(g.dim()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.n()));
  put_le<double>(out, g.length());
  put_le<double>(out, time);
  for (const cplx& v : field.values()) {
    put_le<double>(out, v.real());
    put_le<double>(out, v.imag());
  }
  if (!out) throw InvalidArgument("failed writing snapshot");
}

void write_snapshot(const std::filesystem::path& path, const Field& field, double time) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  write_snapshot(out, field, time);
}

Snapshot read_snapshot(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw InvalidArgument("not a snapshot (bad magic)");
  const auto version = get_le<std::uint16_t>(in, "version");
  if (version != kVersion) throw InvalidArgument("unsupported snapshot version " + std::to_string(version));
  const auto d = get_le<std::uint16_t>(in, "header");
  const auto n = get_le<std::uint32_t>(in, "header");
  const auto L = get_le<double>(in, "header");
  const auto t = get_le<double>(in, "header");
  GridPtr grid = Grid::make(d, n, L);
  Field f(grid);
  for (auto& v : f.values()) {
    const double re = get_le<double>(in, "payload");
    const double im = get_le<double>(in, "payload");
    v = cplx(re, im);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw InvalidArgument("snapshot payload longer than n^d values");
  return {std::move(f), t};
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open snapshot " + path.string());
  return read_snapshot(in);
}

void write_diagnostics_csv(const Diagnostics& dg, std::ostream& out) {
  out << "t,mass,hamiltonian,h1,l_alpha_plus_1\n" << std::setprecision(17);
  for (std::size_t i = 0; i < dg.time.size(); ++i)
    out << dg.time[i] << ',' << dg.mass[i] << ',' << dg.hamiltonian[i] << ',' << dg.h1[i] << ','
        << dg.lp[i] << '\n';
}

void Summary::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_)
    if (k == key) {
      v = value;
      return;
    }
  entries_.emplace_back(key, value);
}
void Summary::set(const std::string& key, double value) { set(key, format_double(value)); }
void Summary::set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }
void Summary::set(const std::string& key, std::size_t value) { set(key, std::to_string(value)); }
void Summary::set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

std::optional<std::string> Summary::get(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

void Summary::write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
}

}  // namespace snls
