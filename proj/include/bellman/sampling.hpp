#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace bellman {

/// Uniform double in [0, 1) built from the top 53 bits of the engine output,
/// so sequences are identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Leaf values exp(U), U uniform on [-3, 3].
inline std::vector<double> log_uniform_leaves(std::size_t count, std::mt19937_64& rng) {
  std::vector<double> out(count);
  for (auto& v : out) v = std::exp(-3.0 + 6.0 * unit_uniform(rng));
  return out;
}

inline std::vector<double> log_uniform_leaves(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return log_uniform_leaves(count, rng);
}

}  // namespace bellman
