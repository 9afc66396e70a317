#pragma once

#include <cmath>
#include <cstdint>

namespace ccp {

// Counter-based splitmix64 (Steele/Lea/Flood; public-domain reference by
// Vigna). output(seed, counter) = mix(seed + (counter + 1) * GAMMA), which is
// the (counter + 1)-th output of the sequentially iterated generator started
// at `seed`. Stateless addressing keeps every draw reproducible regardless of
// evaluation order.
inline constexpr std::uint64_t kSplitMix64Gamma = 0x9E3779B97F4A7C15ULL;

// Recorded in run metadata so sequences can be reproduced elsewhere.
inline constexpr const char* kRngAlgorithmId = "splitmix64/box-muller/v1";

inline std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + (counter + 1) * kSplitMix64Gamma;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Uniform on (0, 1]: ((z >> 11) + 1) * 2^-53. Never 0, so logs stay finite.
inline double uniform01_at(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>((splitmix64_at(seed, counter) >> 11) + 1) * 0x1.0p-53;
}

// Standard normal via Box-Muller over draws (counter, counter + 1).
inline double normal_at(std::uint64_t seed, std::uint64_t counter) {
  const double u1 = uniform01_at(seed, counter);
  const double u2 = uniform01_at(seed, counter + 1);
  constexpr double kTwoPi = 6.2831853071795864769;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

// Child stream seed for substream `index` (replications, shuffles, ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64_at(seed ^ 0x5851F42D4C957F2DULL, index);
}

// Draw in [0, bound). Plain modulo; bias is negligible for bound << 2^64.
inline std::uint64_t bounded_at(std::uint64_t seed, std::uint64_t counter,
                                std::uint64_t bound) {
  return splitmix64_at(seed, counter) % bound;
}

}  // namespace ccp
