#pragma once

#include <cmath>
#include <cstdint>

// Deterministic, platform-independent random number utilities. Every
// stochastic component of the library derives its stream from a caller
// seed through the same 64-bit mix, so results never depend on evaluation
// order, thread count, or the standard library's distribution internals.

namespace thermoscope::rng {

/// splitmix64 finalizer; full-avalanche 64-bit mix.
constexpr std::uint64_t mix(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Derives a child seed from a parent seed and a stream index.
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix(seed ^ mix(stream));
}

constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a,
                               std::uint64_t b) noexcept {
  return derive(derive(seed, a), b);
}

constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a,
                               std::uint64_t b, std::uint64_t c) noexcept {
  return derive(derive(seed, a, b), c);
}

constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a,
                               std::uint64_t b, std::uint64_t c,
                               std::uint64_t d) noexcept {
  return derive(derive(seed, a, b, c), d);
}

/// splitmix64 sequence generator.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform01();
  }

  /// Log-uniform over [lo, hi]; both bounds must be positive.
  double log_uniform(double lo, double hi) noexcept {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  /// Standard normal via Box-Muller (cosine branch only, so each draw
  /// consumes exactly two uniforms and the stream stays reproducible).
  double normal() noexcept {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double sigma) noexcept {
    return mean + sigma * normal();
  }

 private:
  std::uint64_t state_;
};

/// FNV-1a 64-bit hash; used for configuration fingerprints.
constexpr std::uint64_t fnv1a(const char* data, std::size_t n) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace thermoscope::rng
