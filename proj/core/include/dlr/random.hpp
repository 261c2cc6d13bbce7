#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dlr {

/// splitmix64 finalizer; used to derive independent stream seeds.
[[nodiscard]] std::uint64_t mix_seed(std::uint64_t x) noexcept;

/// Derives a child seed from a parent seed and an ordered list of stream
/// identifiers (e.g. {burst_index, loop_index}).
[[nodiscard]] std::uint64_t derive_seed(
    std::uint64_t parent, std::initializer_list<std::uint64_t> path) noexcept;

/// 64-bit FNV-1a over raw bytes.
[[nodiscard]] std::uint64_t fnv1a(const void* data, std::size_t size,
                                  std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

/// Portable random source: mt19937_64 bits turned into doubles by explicit
/// bit manipulation, so streams are identical across standard libraries
/// (std::*_distribution output is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform in the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform in (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller (pairs are cached).
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace dlr
