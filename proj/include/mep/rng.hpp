#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace mep {

// SplitMix64 output function (Steele, Lea, Flood 2014). Used as a stateless
// hash of (seed, counter) so that sample i's draws are independent of
// evaluation order and of all other samples.
inline std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (counter + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Strictly inside (0,1): never 0, so log is safe.
inline double unit_double(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Box-Muller pair for stream index i. Each index owns counters {2i, 2i+1}.
inline std::pair<double, double> normal_pair(std::uint64_t seed,
                                             std::uint64_t i) {
  const double u1 = unit_double(splitmix64_at(seed, 2 * i));
  const double u2 = unit_double(splitmix64_at(seed, 2 * i + 1));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace mep
