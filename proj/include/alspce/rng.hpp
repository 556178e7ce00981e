#pragma once

#include <cstdint>
#include <random>

#include "alspce/special.hpp"

namespace alspce {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates consecutive seeds before they reach the
// generator so "master seed + stream index" is a safe splitting rule.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(master + 0x632be59bd9b4e019ULL * (stream + 1));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(mix64(seed)); }

// Uniform on the open interval (0,1): 53 random bits centered in the cell,
// so 0 and 1 are unreachable and normal_icdf stays finite.
inline double uniform01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform_ab(Rng& rng, double a, double b) {
  return a + (b - a) * uniform01(rng);
}

// Inverse-CDF sampling: fully specified by our own quantile function, so
// streams are reproducible independent of the standard library's
// distribution internals.
inline double standard_normal(Rng& rng) { return normal_icdf(uniform01(rng)); }

inline double exponential(Rng& rng, double rate) {
  return -std::log(uniform01(rng)) / rate;
}

// Unbiased integer draw in [0, n) by rejection; used by our Fisher-Yates
// shuffle for the same portability reason as above.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

template <typename IndexContainer>
void shuffle_indices(IndexContainer& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace alspce
