#pragma once

#include <cstdint>
#include <random>

namespace aknn {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Mixes a base seed with up to three stream coordinates (e.g. N, trial index,
// data stream). Seeds depend only on these values, never on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                    std::uint64_t b = 0,
                                    std::uint64_t c = 0) noexcept {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ splitmix64(a + 0x1000));
  h = splitmix64(h ^ splitmix64(b + 0x2000));
  h = splitmix64(h ^ splitmix64(c + 0x3000));
  return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Uniform draw on [0, 1).
inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace aknn
