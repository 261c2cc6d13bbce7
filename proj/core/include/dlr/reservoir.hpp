#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dlr {

/// Real-valued datapoint fed to a loop (post-transform).
using RealSeries = std::vector<double>;

namespace reservoir {

enum class Nonlinearity { sine, tanh };
enum class MaskDistribution { binary, uniform };

[[nodiscard]] std::string_view to_string(Nonlinearity nl) noexcept;
[[nodiscard]] std::string_view to_string(MaskDistribution d) noexcept;
[[nodiscard]] Nonlinearity parse_nonlinearity(std::string_view name);
[[nodiscard]] MaskDistribution parse_mask_distribution(std::string_view name);

/// Spreading sequence: one weight per chip, fixed for the lifetime of a loop.
struct Mask {
  std::vector<double> values;
  std::uint64_t seed = 0;
  MaskDistribution distribution = MaskDistribution::binary;

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
  friend bool operator==(const Mask&, const Mask&) = default;
};

/// Full description of one delay loop.
struct LoopSpec {
  std::size_t n_nodes = 1;  ///< virtual nodes N (= mask length in chips)
  double loop_gain = 0.0;   ///< feedback gain (eta)
  double input_gain = 1.0;  ///< input gain (nu)
  Nonlinearity nonlinearity = Nonlinearity::sine;
  std::array<double, 2> filter_taps{1.0, 0.0};  ///< h(0), h(1)
  double noise_std = 0.0;  ///< per-chip additive Gaussian noise (sigma)
  std::uint64_t mask_seed = 0;
  MaskDistribution mask_distribution = MaskDistribution::binary;

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const;

  friend bool operator==(const LoopSpec&, const LoopSpec&) = default;
};

/// Loop readout: the last N chip values after the final input sample.
struct StateVector {
  std::vector<double> values;
  std::string loop_id;

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

/// Draws N i.i.d. mask weights from the given distribution. Binary masks
/// hold only -1/+1; uniform masks lie in the open interval (-1, 1).
[[nodiscard]] Mask generate_mask(std::size_t n_nodes, std::uint64_t seed,
                                 MaskDistribution distribution =
                                     MaskDistribution::binary);

/// Mask for a spec, i.e. generate_mask(n_nodes, mask_seed, mask_distribution).
[[nodiscard]] Mask generate_mask(const LoopSpec& spec);

/// Runs one datapoint through the loop, starting from the all-zero state.
///
/// Chip c (1-based) of sample n carries J(c) = mask[j] * s(n) with
/// c = (n-1)N + j, and the loop evolves as
///
///   X(c) = sum_{u=0,1} h(u) f(eta X(c-N+u) + nu J(c-u)) + eps(c)
///
/// with X, J zero before the first chip. The feedback delay of tap u is
/// max(N-u, 1) chips, so the h(1) tap of a single-node loop reads X(c-1).
/// Noise is drawn from noise_seed when given, otherwise from a seed derived
/// from the mask seed. Throws InvalidArgument on bad input and
/// NumericOverflow (naming the chip) if the state becomes non-finite.
[[nodiscard]] StateVector run_loop(std::span<const double> datapoint,
                                   const LoopSpec& spec, const Mask& mask,
                                   std::optional<std::uint64_t> noise_seed = {});

/// A loop spec bound to its mask.
class DelayLoop {
 public:
  explicit DelayLoop(LoopSpec spec);
  DelayLoop(LoopSpec spec, Mask mask);

  [[nodiscard]] const LoopSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] const Mask& mask() const noexcept { return mask_; }

  [[nodiscard]] StateVector run(
      std::span<const double> datapoint,
      std::optional<std::uint64_t> noise_seed = {}) const {
    return run_loop(datapoint, spec_, mask_, noise_seed);
  }

 private:
  LoopSpec spec_;
  Mask mask_;
};

}  // namespace reservoir
}  // namespace dlr
