#pragma once

#include <cstdint>
#include <random>

#include "chordmink/types.hpp"

namespace chordmink {

/// Seed every randomized routine with this unless the caller opts out;
/// reproducibility is the default behaviour of the whole tool.
inline constexpr std::uint64_t kDefaultSeed = 0x5eed0c0ffee12345ULL;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from (seed, tag); used so that
/// parallel shards and battery rows draw from disjoint streams.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t s = seed ^ (0xA0761D6478BD642FULL * (tag + 1));
  splitmix64(s);
  return splitmix64(s);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t tag = 0) {
  return std::mt19937_64(substream(seed, tag));
}

/// Uniform direction on S^{n-1}.
inline Vector random_unit_vector(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss;
  Vector v(dim);
  double norm2 = 0.0;
  do {
    for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
    norm2 = v.squaredNorm();
  } while (norm2 < 1e-12);
  return v / std::sqrt(norm2);
}

}  // namespace chordmink
