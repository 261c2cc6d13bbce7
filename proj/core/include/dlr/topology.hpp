#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dlr/reservoir.hpp"

namespace dlr::topology {

using reservoir::LoopSpec;
using reservoir::Mask;
using reservoir::StateVector;

enum class Combiner { sum, normalized_product, concat };

[[nodiscard]] std::string_view to_string(Combiner c) noexcept;
[[nodiscard]] Combiner parse_combiner(std::string_view name);

/// One loop of a bank and the half-open input range [begin, end) it reads.
struct LoopSlot {
  LoopSpec spec;
  std::size_t begin = 0;
  std::size_t end = 0;

  [[nodiscard]] std::size_t length() const noexcept { return end - begin; }
  friend bool operator==(const LoopSlot&, const LoopSlot&) = default;
};

/// Parallel loops whose slices partition the bank input contiguously.
struct LoopBank {
  std::vector<LoopSlot> loops;

  [[nodiscard]] std::size_t input_length() const noexcept;
  /// Concatenated readout length (sum of n_nodes).
  [[nodiscard]] std::size_t output_length() const noexcept;
  friend bool operator==(const LoopBank&, const LoopBank&) = default;
};

/// Layers of banks. Layer r > 0 reads the concatenated states of layer r-1;
/// the final layer's states are merged by the combiner.
struct TopologySpec {
  std::vector<LoopBank> layers;
  Combiner combiner = Combiner::sum;

  /// Checks slice coverage, layer chaining and combiner length rules.
  /// Throws InvalidArgument.
  void validate() const;
  /// Length of datapoint accepted by the first layer.
  [[nodiscard]] std::size_t input_length() const;
  /// Length of the joint state vector.
  [[nodiscard]] std::size_t output_length() const;

  friend bool operator==(const TopologySpec&, const TopologySpec&) = default;
};

/// k contiguous, order-preserving pieces of equal length. k must divide the
/// datapoint length; there is no implicit padding.
[[nodiscard]] std::vector<std::vector<double>> split_datapoint(
    std::span<const double> datapoint, std::size_t k);

/// Merges state vectors.
///  - sum: elementwise sum (no rescaling)
///  - normalized_product: elementwise product, then L2 normalization; a zero
///    product is returned as the zero vector
///  - concat: concatenation in input order
[[nodiscard]] StateVector combine(std::span<const StateVector> states,
                                  Combiner mode);

/// Bank of k loops cloned from a prototype, each reading a contiguous
/// 1/k slice of [offset, offset + input_length). Mask seeds are
/// prototype.mask_seed + loop index.
[[nodiscard]] LoopBank make_split_bank(const LoopSpec& prototype,
                                       std::size_t input_length, std::size_t k,
                                       std::size_t offset = 0);

/// Single-layer topology of k split loops.
[[nodiscard]] TopologySpec make_split_topology(const LoopSpec& prototype,
                                               std::size_t input_length,
                                               std::size_t k,
                                               Combiner combiner = Combiner::sum);

/// Noise seed handed to loop `index` of layer `layer`. Loop 0 of layer 0
/// receives the topology seed unchanged.
[[nodiscard]] std::uint64_t loop_noise_seed(std::uint64_t topology_seed,
                                            std::size_t layer,
                                            std::size_t index) noexcept;

/// A validated topology with its masks materialized. Immutable; run() may
/// be called concurrently.
class Topology {
 public:
  /// Generates every mask from the loop specs.
  explicit Topology(TopologySpec spec);
  /// Uses explicit masks (e.g. loaded from a model artifact); masks[layer][i]
  /// must match the corresponding loop.
  Topology(TopologySpec spec, std::vector<std::vector<Mask>> masks);

  [[nodiscard]] const TopologySpec& spec() const noexcept { return spec_; }
  [[nodiscard]] const std::vector<std::vector<Mask>>& masks() const noexcept {
    return masks_;
  }
  [[nodiscard]] std::size_t input_length() const { return spec_.input_length(); }
  [[nodiscard]] std::size_t output_length() const {
    return spec_.output_length();
  }

  [[nodiscard]] StateVector run(std::span<const double> datapoint,
                                std::optional<std::uint64_t> noise_seed = {}) const;

 private:
  TopologySpec spec_;
  std::vector<std::vector<Mask>> masks_;
};

/// Convenience: Topology(spec).run(datapoint, noise_seed).
[[nodiscard]] StateVector run_topology(std::span<const double> datapoint,
                                       const TopologySpec& spec,
                                       std::optional<std::uint64_t> noise_seed = {});

}  // namespace dlr::topology
