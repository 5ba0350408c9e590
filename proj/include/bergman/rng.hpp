#pragma once

#include <cstdint>

namespace bergman {

// Counter-based randomness: every draw is a pure function of
// (seed, stream, index, component), so any parallel schedule reproduces the
// serial stream.
inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
                                  std::uint64_t component) noexcept {
  return hash_combine(hash_combine(hash_combine(seed, stream), index), component);
}

// Uniform in [0, 1) with 53 random bits.
inline double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
                              std::uint64_t component) noexcept {
  return static_cast<double>(counter_bits(seed, stream, index, component) >> 11) * 0x1.0p-53;
}

// Van der Corput radical inverse of i in the given prime base.
inline double radical_inverse(std::uint64_t i, unsigned base) noexcept {
  const double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

inline constexpr unsigned kHaltonPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

// Halton point with a Cranley-Patterson rotation keyed by (seed, stream).
inline double halton_rotated(std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
                             unsigned component) noexcept {
  const double shift = counter_uniform(seed, stream, 0xffffffffffffULL, component);
  double u = radical_inverse(index + 1, kHaltonPrimes[component]) + shift;
  if (u >= 1.0) u -= 1.0;
  return u;
}

}  // namespace bergman
