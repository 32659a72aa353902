#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace brwpe {

/// SplitMix64 finalizer; used as the mixing function of the counter-based site generator
/// and to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for stream `index` within the family `stream` of a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) noexcept {
  return mix64(mix64(master ^ mix64(stream)) + index);
}

/// Sequential generator for simulations. Variates are produced from raw 64-bit words
/// so streams are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on (0, 1].
  double uniform_pos() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  /// Uniform integer in [0, n).
  std::uint32_t below(std::uint32_t n) {
    // Lemire's multiply-shift; bias is < 2^-32 for the small n used here.
    return static_cast<std::uint32_t>(((engine_() >> 32) * static_cast<std::uint64_t>(n)) >> 32);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace brwpe
