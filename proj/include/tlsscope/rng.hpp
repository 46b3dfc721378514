#pragma once

// Seeded random streams. Every independent quantity (ensemble draw, grid
// cell) gets its own generator derived from (seed, key...), so results do
// not depend on evaluation order or thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace tlsscope {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a substream seed from a base seed and a list of keys.
inline std::uint64_t substream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::initializer_list<std::uint64_t> keys = {}) {
  return Engine(substream_seed(seed, keys));
}

/// Normal(mean, sd) truncated to [lo, hi] by rejection.
template <class Gen>
double truncated_normal(Gen& gen, double mean, double sd, double lo, double hi) {
  std::normal_distribution<double> dist(mean, sd);
  for (int i = 0; i < 100000; ++i) {
    const double x = dist(gen);
    if (x >= lo && x <= hi) return x;
  }
  return std::clamp(mean, lo, hi);
}

/// Mean of Normal(mean, sd) truncated to [lo, inf).
inline double truncated_normal_mean(double mean, double sd, double lo) {
  const double a = (lo - mean) / sd;
  const double pdf = std::exp(-0.5 * a * a) / std::sqrt(2.0 * 3.14159265358979323846);
  const double tail = 0.5 * std::erfc(a / std::sqrt(2.0));
  return mean + sd * pdf / tail;
}

}  // namespace tlsscope
