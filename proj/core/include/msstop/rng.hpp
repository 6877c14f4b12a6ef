#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace msstop {

/// Portable random stream: std::mt19937_64 (its output sequence is fixed by
/// the C++ standard) with uniforms formed from the top 53 bits. Standard
/// library distributions are avoided because their algorithms are
/// implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  /// Index drawn by inverse CDF from non-negative weights summing to ~1.
  int categorical(std::span<const double> probabilities);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller (two uniforms per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer; derives independent child seeds (replicates, starts).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace msstop
