// Microbenchmarks for the hot paths: loop evolution, the transforms and the
// ridge solve.

#include <benchmark/benchmark.h>

#include "dlr/classifier.hpp"
#include "dlr/random.hpp"
#include "dlr/reservoir.hpp"
#include "dlr/topology.hpp"
#include "dlr/transforms.hpp"

namespace {

using namespace dlr;

std::vector<double> random_series(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> s(n);
  for (double& v : s) v = rng.uniform(-1.0, 1.0);
  return s;
}

IQBurst random_burst(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  IQBurst b;
  for (std::size_t i = 0; i < n; ++i) b.samples.emplace_back(rng.normal(), rng.normal());
  return b;
}

// Args: nodes, datapoint length.
void BM_RunLoop(benchmark::State& state) {
  reservoir::LoopSpec spec;
  spec.n_nodes = static_cast<std::size_t>(state.range(0));
  spec.filter_taps = {0.5, 0.5};
  spec.loop_gain = 0.5;
  const auto mask = reservoir::generate_mask(spec);
  const auto s = random_series(static_cast<std::size_t>(state.range(1)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(reservoir::run_loop(s, spec, mask));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_RunLoop)->Args({100, 1024})->Args({300, 1024})->Args({600, 1024});

// Args: split k, total nodes, over a 1024-sample datapoint.
void BM_SplitTopology(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  reservoir::LoopSpec proto;
  proto.n_nodes = static_cast<std::size_t>(state.range(1)) / k;
  proto.filter_taps = {0.5, 0.5};
  proto.loop_gain = 0.5;
  const auto topo = topology::make_split_topology(proto, 1024, k);
  const auto s = random_series(1024, 2);
  for (auto _ : state) benchmark::DoNotOptimize(topology::run_topology(s, topo));
}
BENCHMARK(BM_SplitTopology)->Args({1, 600})->Args({2, 600})->Args({8, 600});

void BM_FftMagnitude(benchmark::State& state) {
  const auto b = random_burst(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(transforms::fft_magnitude(b));
}
BENCHMARK(BM_FftMagnitude)->Arg(256)->Arg(1024);

// Args: burst length, decimation.
void BM_DecimatedDft(benchmark::State& state) {
  const auto b = random_burst(static_cast<std::size_t>(state.range(0)), 4);
  const auto d = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(transforms::decimated_dft(b, d));
}
BENCHMARK(BM_DecimatedDft)->Args({1024, 1})->Args({1024, 4})->Args({1024, 8});

// Args: training rows, features.
void BM_TrainRidge(benchmark::State& state) {
  Rng rng(5);
  classifier::DesignMatrix d;
  d.rows.resize(state.range(0), state.range(1));
  for (Eigen::Index i = 0; i < d.rows.size(); ++i) d.rows.data()[i] = rng.normal();
  d.class_count = 10;
  for (Eigen::Index i = 0; i < d.rows.rows(); ++i) d.labels.push_back(static_cast<std::size_t>(i) % 10);
  for (auto _ : state) benchmark::DoNotOptimize(classifier::train_ridge(d, 1e-3));
}
BENCHMARK(BM_TrainRidge)->Args({1600, 75})->Args({1600, 300})->Args({1600, 600});

}  // namespace

BENCHMARK_MAIN();
