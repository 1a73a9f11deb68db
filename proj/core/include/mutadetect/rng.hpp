#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>
#include <vector>

namespace mutadetect {

// All randomness in the pipeline flows from one 64-bit seed through named
// sub-streams ("sanitize", "kmeans-init", "chain-draws", ...). Each consumer
// derives its own engine, so components stay reproducible in isolation and
// any parallel schedule yields the same stream assignment as the sequential
// one.
//
// The uniform helpers below avoid std::*_distribution on purpose: their
// output is pinned by this code, not by the standard library implementation.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Engine for sub-stream `name` with optional integer qualifiers
// (e.g. record index, trial, epoch).
inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name,
                                 std::initializer_list<std::uint64_t> keys = {}) {
  std::uint64_t h = splitmix64(seed ^ fnv1a64(name));
  for (std::uint64_t k : keys) h = splitmix64(h ^ k);
  return std::mt19937_64(h);
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

// Uniform integer in [0, n). Rejection sampling keeps the result exact and
// independent of the engine's word size.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Fisher-Yates, written out so the permutation is ours, not the library's.
template <typename T>
void shuffle_in_place(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace mutadetect
