#include "dlr/reservoir.hpp"

#include <cmath>
#include <string>

#include "dlr/error.hpp"
#include "dlr/random.hpp"
#include "dlr/testing/linear_loop.hpp"

namespace dlr::reservoir {

std::string_view to_string(Nonlinearity nl) noexcept {
  switch (nl) {
    case Nonlinearity::sine:
      return "sine";
    case Nonlinearity::tanh:
      return "tanh";
  }
  return "sine";
}

std::string_view to_string(MaskDistribution d) noexcept {
  return d == MaskDistribution::binary ? "binary" : "uniform";
}

Nonlinearity parse_nonlinearity(std::string_view name) {
  if (name == "sine" || name == "sin") return Nonlinearity::sine;
  if (name == "tanh") return Nonlinearity::tanh;
  throw InvalidArgument("unknown nonlinearity '" + std::string(name) +
                        "' (expected sine or tanh)");
}

MaskDistribution parse_mask_distribution(std::string_view name) {
  if (name == "binary") return MaskDistribution::binary;
  if (name == "uniform") return MaskDistribution::uniform;
  throw InvalidArgument("unknown mask distribution '" + std::string(name) +
                        "' (expected binary or uniform)");
}

void LoopSpec::validate() const {
  if (n_nodes == 0) throw InvalidArgument("loop n_nodes must be >= 1");
  if (filter_taps[0] == 0.0 && filter_taps[1] == 0.0)
    throw InvalidArgument("loop filter taps must not both be zero");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std))
    throw InvalidArgument("loop noise_std must be finite and >= 0");
  if (!std::isfinite(loop_gain) || !std::isfinite(input_gain) ||
      !std::isfinite(filter_taps[0]) || !std::isfinite(filter_taps[1]))
    throw InvalidArgument("loop gains and filter taps must be finite");
}

Mask generate_mask(std::size_t n_nodes, std::uint64_t seed,
                   MaskDistribution distribution) {
  if (n_nodes == 0) throw InvalidArgument("mask length must be >= 1");
  Mask mask;
  mask.seed = seed;
  mask.distribution = distribution;
  mask.values.resize(n_nodes);
  Rng rng(seed);
  for (auto& v : mask.values) {
    if (distribution == MaskDistribution::binary) {
      v = (rng.bits() >> 63) != 0 ? 1.0 : -1.0;
    } else {
      v = 2.0 * rng.uniform() - 1.0;
    }
  }
  return mask;
}

Mask generate_mask(const LoopSpec& spec) {
  return generate_mask(spec.n_nodes, spec.mask_seed, spec.mask_distribution);
}

namespace {

void check_inputs(std::span<const double> datapoint, const LoopSpec& spec,
                  const Mask& mask) {
  spec.validate();
  if (datapoint.empty()) throw InvalidArgument("datapoint must be non-empty");
  if (mask.size() != spec.n_nodes)
    throw InvalidArgument("mask length " + std::to_string(mask.size()) +
                          " does not match n_nodes " +
                          std::to_string(spec.n_nodes));
  for (std::size_t i = 0; i < datapoint.size(); ++i) {
    if (!std::isfinite(datapoint[i]))
      throw InvalidArgument("datapoint sample " + std::to_string(i) +
                            " is not finite");
  }
}

// ring[j] holds X at chip position j of the most recent sample that has
// reached position j. Before chip (n, j) is written, ring[j] = X(c-N) and
// ring[(j+1) % N] = X(c-N+1).
template <class F>
StateVector run_impl(std::span<const double> datapoint, const LoopSpec& spec,
                     const Mask& mask, std::optional<std::uint64_t> noise_seed,
                     F&& f) {
  check_inputs(datapoint, spec, mask);

  const std::size_t n = spec.n_nodes;
  const double eta = spec.loop_gain;
  const double h0 = spec.filter_taps[0];
  const double h1 = spec.filter_taps[1];
  const double sigma = spec.noise_std;

  std::vector<double> weights(n);
  for (std::size_t j = 0; j < n; ++j) weights[j] = spec.input_gain * mask.values[j];

  std::optional<Rng> noise;
  if (sigma > 0.0)
    noise.emplace(noise_seed.value_or(derive_seed(spec.mask_seed, {0x6e6f697365ULL})));

  std::vector<double> ring(n, 0.0);
  double prev_sample = 0.0;
  std::size_t chip = 0;
  for (const double sample : datapoint) {
    for (std::size_t j = 0; j < n; ++j, ++chip) {
      double x = 0.0;
      if (h0 != 0.0) x += h0 * f(eta * ring[j] + weights[j] * sample);
      if (h1 != 0.0) {
        const double neighbour = j + 1 < n ? ring[j + 1] : ring[0];
        const double drive =
            j > 0 ? weights[j - 1] * sample : weights[n - 1] * prev_sample;
        x += h1 * f(eta * neighbour + drive);
      }
      if (noise) x += sigma * noise->normal();
      if (!std::isfinite(x))
        throw NumericOverflow("loop state became non-finite at chip " +
                              std::to_string(chip + 1));
      ring[j] = x;
    }
    prev_sample = sample;
  }
  return StateVector{std::move(ring), "loop"};
}

}  // namespace

StateVector run_loop(std::span<const double> datapoint, const LoopSpec& spec,
                     const Mask& mask, std::optional<std::uint64_t> noise_seed) {
  if (spec.nonlinearity == Nonlinearity::tanh)
    return run_impl(datapoint, spec, mask, noise_seed,
                    [](double v) { return std::tanh(v); });
  return run_impl(datapoint, spec, mask, noise_seed,
                  [](double v) { return std::sin(v); });
}

DelayLoop::DelayLoop(LoopSpec spec) : spec_(spec), mask_(generate_mask(spec)) {
  spec_.validate();
}

DelayLoop::DelayLoop(LoopSpec spec, Mask mask)
    : spec_(spec), mask_(std::move(mask)) {
  spec_.validate();
  if (mask_.size() != spec_.n_nodes)
    throw InvalidArgument("mask length does not match n_nodes");
}

namespace testing {

StateVector run_loop_identity(std::span<const double> datapoint,
                              const LoopSpec& spec, const Mask& mask,
                              std::optional<std::uint64_t> noise_seed) {
  return run_impl(datapoint, spec, mask, noise_seed, [](double v) { return v; });
}

}  // namespace testing
}  // namespace dlr::reservoir
