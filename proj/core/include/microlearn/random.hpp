#pragma once

#include <cstdint>
#include <random>

namespace microlearn {

/// std::mt19937_64 with hand-written distributions. The engine's output is
/// fixed by the C++ standard; std:: distributions are not, so none are used.
/// Streams are therefore identical on every conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on [low, high).
  double uniform(double low, double high) { return low + (high - low) * uniform01(); }

  /// Unbiased integer in [0, bound); bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace microlearn
