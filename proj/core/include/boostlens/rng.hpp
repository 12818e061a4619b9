#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace boostlens {

/// FNV-1a 64-bit hash. Used for artifact checksums and seed derivation.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(std::string_view s);

std::uint64_t splitmix64(std::uint64_t x);

/// Derives a named sub-seed from a root seed. Every source of randomness in a
/// run pulls its own labelled seed so stages can be re-run independently.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);

/// mt19937_64 with hand-rolled output transforms. The engine's sequence is
/// pinned by the C++ standard; std::*_distribution is not, so all draws go
/// through the transforms below to keep output identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Uniform in [0, n) without modulo bias.
  std::uint64_t below(std::uint64_t n);

  /// Uniform integer in [lo, hi], bounds inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Standard normal via Box-Muller (one value per two uniforms; no state).
  double normal();

  /// Index draw proportional to `weights` (need not be normalized).
  std::size_t categorical(const std::vector<double>& weights);

  /// Fisher-Yates shuffle using this engine.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace boostlens
