#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace evtail {

// 64-bit avalanche mixer (splitmix64 finalizer).  Used to derive independent
// substream seeds from (seed, purpose, index) tuples so that parallel callers
// get identical draws regardless of scheduling.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) { return mix64(mix64(a) ^ b); }

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
  return mix64(mix64(seed, purpose), index);
}

// Counter-based random stream: every variate is a pure function of
// (key, counter), so generation order and thread layout never matter.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  // Uniform on (0, 1); never returns an exact 0 or 1.
  double uniform(std::uint64_t counter) const {
    const std::uint64_t bits = mix64(key_, counter);
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; consumes two counter slots per draw.
  double normal(std::uint64_t counter) const {
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double exponential(std::uint64_t counter) const { return -std::log(uniform(counter)); }

 private:
  std::uint64_t key_;
};

// Unbiased bounded draw for resampling indices (Lemire's method).
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t x = rng();
  __uint128_t m = static_cast<__uint128_t>(x) * static_cast<__uint128_t>(n);
  auto lo = static_cast<std::uint64_t>(m);
  if (lo < n) {
    const std::uint64_t threshold = (0ULL - n) % n;
    while (lo < threshold) {
      m = static_cast<__uint128_t>(rng()) * static_cast<__uint128_t>(n);
      lo = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

}  // namespace evtail
