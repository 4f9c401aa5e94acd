#pragma once

#include <cstdint>
#include <random>

namespace qcool {

using rng_t = std::mt19937_64;

namespace detail {

constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Independent stream keyed by (seed, stream, index). Shot k of a batch uses index k.
inline rng_t keyed_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t h = detail::mix64(seed);
  h = detail::mix64(h ^ detail::mix64(stream + 0x51ed27ULL));
  h = detail::mix64(h ^ index);
  return rng_t(h);
}

inline double uniform01(rng_t& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

/// Uniform on the open interval (0,1).
inline double uniform_open(rng_t& rng) {
  double u;
  do {
    u = uniform01(rng);
  } while (u <= 0.0);
  return u;
}

inline int random_bit(rng_t& rng) { return static_cast<int>(rng() >> 63); }

}  // namespace qcool
