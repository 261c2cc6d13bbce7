#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "dlr/config.hpp"
#include "dlr/error.hpp"
#include "dlr/random.hpp"

namespace {

using namespace dlr;
using namespace dlr::config;
using nlohmann::json;

json base_json() {
  return json::parse(R"({
    "name": "cfg", "seed": 7,
    "data": {"source": "sei", "n_devices": 4, "bursts_per_device": 10},
    "transforms": [{"kind": "decimated_dft", "decimation": 4}],
    "model": "dlr",
    "topology": {"split": 2, "combiner": "sum",
                 "loop": {"n_nodes": 50, "loop_gain": 0.4, "input_gain": 0.8,
                          "filter_taps": [0.7, 0.3], "mask_distribution": "uniform"}},
    "input_gain_mode": "normalized",
    "lambda": 0.01,
    "sweep": {"k": [1, 2, 4], "lambda": [0.1, 1.0], "models": ["dlr", "raw_rr"]},
    "hyperopt": {"method": "grid", "space": {"loop_gain": {"range": [0.1, 0.9]},
                                             "n_nodes": {"values": [20, 40]}}},
    "report": {"baseline_params": 240000}
  })");
}

TEST(Config, ParseAndRoundTrip) {
  const auto c = parse_config(base_json());
  EXPECT_EQ(c.name, "cfg");
  EXPECT_EQ(c.data.source, DataSource::sei);
  EXPECT_EQ(c.data.sei.n_devices, 4u);
  EXPECT_EQ(c.topology.split, 2u);
  EXPECT_EQ(c.topology.loop.n_nodes, 50u);
  EXPECT_EQ(c.input_gain_mode, GainMode::normalized);
  ASSERT_TRUE(c.hyperopt.has_value());
  EXPECT_EQ(c.hyperopt->space.size(), 2u);
  EXPECT_EQ(c.report.baseline_params, 240000.0);
  const auto again = parse_config(to_json(c));
  EXPECT_EQ(to_json(again), to_json(c));
  EXPECT_NO_THROW(validate(c, c.burst_length()));
}

TEST(Config, ClosedWorld) {
  for (const char* path : {"/bogus", "/data/bogus", "/topology/bogus", "/topology/loop/bogus",
                           "/sweep/bogus", "/hyperopt/bogus", "/report/bogus"}) {
    auto j = base_json();
    j[json::json_pointer(path)] = 1;
    EXPECT_THROW((void)parse_config(j), ConfigError) << path;
  }
  auto j = base_json();
  j["transforms"][0]["bogus"] = 1;
  EXPECT_THROW((void)parse_config(j), ConfigError);
}

TEST(Config, BadValues) {
  auto expect_bad = [](const char* pointer, json value) {
    auto j = base_json();
    j[json::json_pointer(pointer)] = value;
    EXPECT_THROW(
        {
          const auto c = parse_config(j);
          validate(c, c.burst_length());
        },
        ConfigError)
        << pointer << " = " << value.dump();
  };
  expect_bad("/data/source", "radar");
  expect_bad("/model", "svm");
  expect_bad("/lambda", -1.0);
  expect_bad("/lambda", "small");
  expect_bad("/topology/split", 3);
  expect_bad("/topology/combiner", "max");
  expect_bad("/topology/loop/n_nodes", 0);
  expect_bad("/topology/loop/noise_std", -0.1);
  expect_bad("/topology/loop/nonlinearity", "relu");
  expect_bad("/transforms/0/kind", "wavelet");
  expect_bad("/transforms/0/decimation", 3);
  expect_bad("/data/test_fraction", 1.5);
  expect_bad("/threads", 0);
  expect_bad("/hyperopt/space/bogus_param", json{{"range", {0, 1}}});
}

// Random damage to a valid config either still parses and validates or is
// reported as ConfigError; nothing else escapes.
TEST(Config, CorruptedConfigsFailCleanly) {
  Rng rng(12);
  const json replacements[] = {json(nullptr), json(-3), json(0), json(1e308), json("x"),
                               json::array(), json::object(), json(true), json(2.5)};
  for (int rep = 0; rep < 500; ++rep) {
    auto j = base_json();
    const auto flat = j.flatten();
    auto it = flat.begin();
    std::advance(it, static_cast<long>(rng.below(flat.size())));
    const json::json_pointer ptr(it.key());
    if (rng.uniform() < 0.3) {
      auto& parent = j.at(ptr.parent_pointer());
      if (parent.is_array()) {
        parent.erase(std::stoul(ptr.back()));
      } else {
        parent.erase(ptr.back());
      }
    } else {
      j[ptr] = replacements[rng.below(std::size(replacements))];
    }
    try {
      const auto c = parse_config(j);
      validate(c, c.burst_length());
    } catch (const ConfigError&) {
    } catch (const std::exception& e) {
      ADD_FAILURE() << it.key() << ": " << typeid(e).name() << " " << e.what();
    }
  }
}

TEST(Config, LoadAllowsComments) {
  const auto path = std::filesystem::temp_directory_path() / "dlr_cfg_comments.json";
  {
    std::ofstream out(path);
    out << "// experiment\n{\"name\": \"c\", /* inline */ \"lambda\": 0.5}\n";
  }
  const auto c = load_config(path);
  EXPECT_EQ(c.name, "c");
  EXPECT_EQ(c.lambda, 0.5);
  EXPECT_THROW((void)load_config(path.string() + ".missing"), ConfigError);
  {
    std::ofstream out(path);
    out << "{\"name\": ";
  }
  EXPECT_THROW((void)load_config(path), ConfigError);
}

TEST(Config, TopologyMaskSeeds) {
  auto c = parse_config(base_json());
  const auto spec = build_topology(c, c.burst_length());
  ASSERT_EQ(spec.layers.size(), 1u);
  ASSERT_EQ(spec.layers[0].loops.size(), 2u);
  const auto base = spec.layers[0].loops[0].spec.mask_seed;
  EXPECT_EQ(spec.layers[0].loops[1].spec.mask_seed, base + 1);
  EXPECT_EQ(spec.layers[0].loops[0].length(), 128u);
  c.topology.mask_seed = 500;
  EXPECT_EQ(build_topology(c, c.burst_length()).layers[0].loops[1].spec.mask_seed, 501u);
  c.seed = 8;
  c.topology.mask_seed.reset();
  EXPECT_NE(build_topology(c, c.burst_length()).layers[0].loops[0].spec.mask_seed, base);
}

TEST(Config, ExplicitLayers) {
  auto j = base_json();
  j.erase("sweep");
  j["topology"] = json::parse(R"({"combiner": "concat", "layers": [
      {"loops": [{"begin": 0, "end": 200, "n_nodes": 30}, {"begin": 200, "end": 256, "n_nodes": 10}]},
      {"loops": [{"begin": 0, "end": 40, "n_nodes": 20}]}]})");
  const auto c = parse_config(j);
  const auto spec = build_topology(c, c.burst_length());
  ASSERT_EQ(spec.layers.size(), 2u);
  EXPECT_EQ(spec.output_length(), 20u);
  EXPECT_NO_THROW(validate(c, c.burst_length()));
  j["topology"]["layers"][0]["loops"][1]["end"] = 250;
  EXPECT_THROW(validate(parse_config(j), 1024), ConfigError);
}

TEST(Config, SweepExpansion) {
  const auto c = parse_config(base_json());
  const auto points = expand_sweep(c, c.burst_length());
  ASSERT_EQ(points.size(), 3u);  // lambda and model reuse each point
  EXPECT_EQ(points[2].config.topology.split, 4u);
  EXPECT_EQ(points[2].axes.at("k"), 4);
  auto bad = base_json();
  bad["sweep"]["k"] = {1, 3};
  EXPECT_THROW((void)expand_sweep(parse_config(bad), 1024), ConfigError);
}

TEST(Config, WithParams) {
  const auto c = parse_config(base_json());
  const std::vector<hyperopt::ParamDomain> space = {
      hyperopt::ParamDomain::categorical("combiner", {"sum", "concat"}),
      hyperopt::ParamDomain::continuous("filter_h1", 0, 1)};
  const auto t = with_params(c, {{"n_nodes", 20}, {"lambda", 0.5}, {"k", 4}, {"combiner", 1},
                                 {"filter_h1", 0.25}, {"decimation", 8}},
                             space);
  EXPECT_EQ(t.topology.loop.n_nodes, 20u);
  EXPECT_EQ(t.lambda, 0.5);
  EXPECT_EQ(t.topology.split, 4u);
  EXPECT_EQ(t.topology.combiner, topology::Combiner::concat);
  EXPECT_EQ(t.topology.loop.filter_taps[1], 0.25);
  EXPECT_EQ(t.transforms[0].decimation, 8u);
  EXPECT_THROW((void)with_params(c, {{"bogus", 1}}, space), ConfigError);
  for (const auto& name : tunable_parameters()) EXPECT_FALSE(name.empty());
}

TEST(Config, ShippedConfigsValidate) {
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(DLR_CONFIGS_DIR)) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    EXPECT_NO_THROW({
      const auto c = load_config(entry.path());
      validate(c, c.burst_length());
      if (c.sweep) (void)expand_sweep(c, c.burst_length());
    }) << entry.path();
  }
  EXPECT_GE(seen, 8u);
}

}  // namespace
