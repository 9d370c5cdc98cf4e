#pragma once

#include <cstdint>
#include <random>

namespace klrhop {

/// SplitMix64 finalizer. Used to derive independent seeds from structured keys.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31U);
}

/// Combines a parent seed with an integer key: splitmix64(parent ^ splitmix64(key)).
constexpr std::uint64_t mix_seed(std::uint64_t parent, std::uint64_t key) noexcept {
  return splitmix64(parent ^ splitmix64(key));
}

/// mt19937_64 output is fixed by the standard, so these helpers are portable
/// across standard library implementations (unlike the std distributions).
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11U) * 0x1.0p-53;
}

inline double random_sign(std::mt19937_64& gen) { return (gen() >> 63U) != 0U ? 1.0 : -1.0; }

}  // namespace klrhop
