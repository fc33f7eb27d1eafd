#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace benthic {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent stream seeds from a
/// master seed and a counter so that results never depend on scheduling.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept {
  return derive_seed(derive_seed(master, a), b);
}

/// Uniform in [0, 1) from the top 53 bits; portable across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform in (0, 1].
inline double uniform_open0(Rng& rng) { return 1.0 - uniform01(rng); }

inline constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

/// Number of failures before the first success of Bernoulli(p) trials.
inline std::uint64_t geometric_failures(double p, Rng& rng) {
  if (p >= 1.0) return 0;
  if (!(p > 0.0)) return kNever;
  const double g = std::floor(std::log(uniform_open0(rng)) / std::log1p(-p));
  if (!(g < 1.8e19)) return kNever;
  return static_cast<std::uint64_t>(g);
}

}  // namespace benthic
