#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gridsigma {

/// Mixes a 64-bit value (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Child seed for (stream, index) under a master seed. Independent of the
/// order in which children are requested.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                          std::uint64_t index = 0) noexcept;

/// Seeded generator whose derived variates are bit-identical on every
/// platform. std::mt19937_64 output is fully specified by the standard; the
/// std distributions are not, so the transforms live here.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n); n > 0. Unbiased (rejection sampling).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller (one variate per call, no caching).
  double normal();
  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gridsigma
