#pragma once

// Counter-based generator (Philox-4x32-10). A draw is a pure function of
// (key, counter), so paths can be generated in any order on any thread and
// still come out bit-identical.

#include <array>
#include <cstdint>

namespace snls {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept;

/// Addresses one standard normal draw.
struct DrawAddress {
  std::uint64_t seed;
  std::uint64_t path_id;
  std::uint32_t mode;
  std::uint32_t step;
  std::uint32_t stream;  // 0 = base increments, l + 1 = bridge midpoints of level l -> l + 1
};

/// N(0,1) via Box-Muller on the two 53-bit uniforms of one Philox block.
double standard_normal(const DrawAddress& at) noexcept;

/// Uniform in [0, 1) from the same addressing (used by tests and generators).
double uniform01(const DrawAddress& at) noexcept;

}  // namespace snls
