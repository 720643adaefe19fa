#pragma once

#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace qcompress {

using rng_t = std::mt19937_64;

/// Independent generator for (seed, stream); results never depend on the
/// order in which streams are consumed.
inline rng_t make_stream(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x51ed2701u};
  return rng_t(seq);
}

/// i.i.d. uniform angles on [0, 2pi).
inline std::vector<double> uniform_angles(std::size_t count, rng_t& rng) {
  std::uniform_real_distribution<double> dist(0.0, 2.0 * std::numbers::pi);
  std::vector<double> out(count);
  for (auto& v : out) v = dist(rng);
  return out;
}

}  // namespace qcompress
