#include "dlr/topology.hpp"

#include <cmath>
#include <string>

#include "dlr/error.hpp"
#include "dlr/random.hpp"

namespace dlr::topology {

std::string_view to_string(Combiner c) noexcept {
  switch (c) {
    case Combiner::sum:
      return "sum";
    case Combiner::normalized_product:
      return "normalized_product";
    case Combiner::concat:
      return "concat";
  }
  return "sum";
}

Combiner parse_combiner(std::string_view name) {
  if (name == "sum") return Combiner::sum;
  if (name == "normalized_product") return Combiner::normalized_product;
  if (name == "concat") return Combiner::concat;
  throw InvalidArgument("unknown combiner '" + std::string(name) +
                        "' (expected sum, normalized_product or concat)");
}

std::size_t LoopBank::input_length() const noexcept {
  return loops.empty() ? 0 : loops.back().end;
}

std::size_t LoopBank::output_length() const noexcept {
  std::size_t total = 0;
  for (const auto& slot : loops) total += slot.spec.n_nodes;
  return total;
}

void TopologySpec::validate() const {
  if (layers.empty()) throw InvalidArgument("topology needs at least one layer");
  for (std::size_t r = 0; r < layers.size(); ++r) {
    const auto& bank = layers[r];
    const std::string where = "layer " + std::to_string(r);
    if (bank.loops.empty()) throw InvalidArgument(where + " has no loops");
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < bank.loops.size(); ++i) {
      const auto& slot = bank.loops[i];
      slot.spec.validate();
      if (slot.begin != cursor || slot.end <= slot.begin)
        throw InvalidArgument(where + " loop " + std::to_string(i) +
                              ": slices must be contiguous, ordered and non-empty");
      cursor = slot.end;
    }
    if (r > 0 && bank.input_length() != layers[r - 1].output_length())
      throw InvalidArgument(where + " input length " +
                            std::to_string(bank.input_length()) +
                            " does not cover the previous layer's output length " +
                            std::to_string(layers[r - 1].output_length()));
  }
  if (combiner != Combiner::concat) {
    const auto& last = layers.back().loops;
    for (const auto& slot : last) {
      if (slot.spec.n_nodes != last.front().spec.n_nodes)
        throw InvalidArgument(
            "sum/normalized_product combiners require equal n_nodes in the "
            "final layer");
    }
  }
}

std::size_t TopologySpec::input_length() const {
  return layers.empty() ? 0 : layers.front().input_length();
}

std::size_t TopologySpec::output_length() const {
  if (layers.empty()) return 0;
  const auto& last = layers.back();
  if (combiner == Combiner::concat) return last.output_length();
  return last.loops.empty() ? 0 : last.loops.front().spec.n_nodes;
}

std::vector<std::vector<double>> split_datapoint(std::span<const double> datapoint,
                                                 std::size_t k) {
  if (k == 0) throw InvalidArgument("split count k must be >= 1");
  if (datapoint.empty() || datapoint.size() % k != 0)
    throw InvalidArgument("split count " + std::to_string(k) +
                          " does not divide datapoint length " +
                          std::to_string(datapoint.size()));
  const std::size_t piece = datapoint.size() / k;
  std::vector<std::vector<double>> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto first = datapoint.begin() + static_cast<std::ptrdiff_t>(i * piece);
    out.emplace_back(first, first + static_cast<std::ptrdiff_t>(piece));
  }
  return out;
}

StateVector combine(std::span<const StateVector> states, Combiner mode) {
  if (states.empty()) throw InvalidArgument("combine needs at least one state");
  StateVector out;
  out.loop_id = "joint";
  if (mode == Combiner::concat) {
    for (const auto& s : states)
      out.values.insert(out.values.end(), s.values.begin(), s.values.end());
    return out;
  }
  const std::size_t n = states.front().size();
  for (const auto& s : states) {
    if (s.size() != n)
      throw InvalidArgument(std::string(to_string(mode)) +
                            " combiner requires equal state lengths");
  }
  out.values = states.front().values;
  if (mode == Combiner::sum) {
    for (std::size_t j = 1; j < states.size(); ++j)
      for (std::size_t i = 0; i < n; ++i) out.values[i] += states[j].values[i];
    return out;
  }
  for (std::size_t j = 1; j < states.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) out.values[i] *= states[j].values[i];
  double norm2 = 0.0;
  for (double v : out.values) norm2 += v * v;
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : out.values) v *= inv;
  }
  return out;
}

LoopBank make_split_bank(const LoopSpec& prototype, std::size_t input_length,
                         std::size_t k, std::size_t offset) {
  if (k == 0 || input_length == 0 || input_length % k != 0)
    throw InvalidArgument("split count " + std::to_string(k) +
                          " does not divide input length " +
                          std::to_string(input_length));
  const std::size_t piece = input_length / k;
  LoopBank bank;
  for (std::size_t i = 0; i < k; ++i) {
    LoopSlot slot{prototype, offset + i * piece, offset + (i + 1) * piece};
    slot.spec.mask_seed = prototype.mask_seed + i;
    bank.loops.push_back(slot);
  }
  return bank;
}

TopologySpec make_split_topology(const LoopSpec& prototype,
                                 std::size_t input_length, std::size_t k,
                                 Combiner combiner) {
  TopologySpec spec;
  spec.layers.push_back(make_split_bank(prototype, input_length, k));
  spec.combiner = combiner;
  spec.validate();
  return spec;
}

std::uint64_t loop_noise_seed(std::uint64_t topology_seed, std::size_t layer,
                              std::size_t index) noexcept {
  if (layer == 0 && index == 0) return topology_seed;
  return derive_seed(topology_seed, {layer, index});
}

Topology::Topology(TopologySpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  for (const auto& bank : spec_.layers) {
    auto& layer_masks = masks_.emplace_back();
    for (const auto& slot : bank.loops)
      layer_masks.push_back(reservoir::generate_mask(slot.spec));
  }
}

Topology::Topology(TopologySpec spec, std::vector<std::vector<Mask>> masks)
    : spec_(std::move(spec)), masks_(std::move(masks)) {
  spec_.validate();
  if (masks_.size() != spec_.layers.size())
    throw InvalidArgument("mask layers do not match topology layers");
  for (std::size_t r = 0; r < masks_.size(); ++r) {
    const auto& loops = spec_.layers[r].loops;
    if (masks_[r].size() != loops.size())
      throw InvalidArgument("mask count does not match loops in layer " +
                            std::to_string(r));
    for (std::size_t i = 0; i < loops.size(); ++i) {
      if (masks_[r][i].size() != loops[i].spec.n_nodes)
        throw InvalidArgument("mask " + std::to_string(r) + "." +
                              std::to_string(i) + " length does not match n_nodes");
    }
  }
}

StateVector Topology::run(std::span<const double> datapoint,
                          std::optional<std::uint64_t> noise_seed) const {
  if (datapoint.size() != spec_.input_length())
    throw InvalidArgument("datapoint length " + std::to_string(datapoint.size()) +
                          " does not match topology input length " +
                          std::to_string(spec_.input_length()));
  std::vector<double> input(datapoint.begin(), datapoint.end());
  std::vector<StateVector> states;
  for (std::size_t r = 0; r < spec_.layers.size(); ++r) {
    const auto& loops = spec_.layers[r].loops;
    states.clear();
    states.reserve(loops.size());
    for (std::size_t i = 0; i < loops.size(); ++i) {
      const auto& slot = loops[i];
      std::span<const double> piece(input.data() + slot.begin, slot.length());
      std::optional<std::uint64_t> seed;
      if (noise_seed) seed = loop_noise_seed(*noise_seed, r, i);
      auto state = reservoir::run_loop(piece, slot.spec, masks_[r][i], seed);
      state.loop_id = "L" + std::to_string(r) + "." + std::to_string(i);
      states.push_back(std::move(state));
    }
    if (r + 1 < spec_.layers.size()) {
      input.clear();
      for (const auto& s : states)
        input.insert(input.end(), s.values.begin(), s.values.end());
    }
  }
  return combine(states, spec_.combiner);
}

StateVector run_topology(std::span<const double> datapoint,
                         const TopologySpec& spec,
                         std::optional<std::uint64_t> noise_seed) {
  return Topology(spec).run(datapoint, noise_seed);
}

}  // namespace dlr::topology
