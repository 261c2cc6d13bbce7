#include "dlr/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>

#include "dlr/error.hpp"
#include "dlr/random.hpp"

namespace dlr::config {

using nlohmann::json;

namespace {

constexpr std::uint64_t kMaskStream = 0x6d61736bULL;

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

template <class T>
T read(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

template <class T>
std::vector<T> read_list(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) return {};
  const auto& v = j.at(key);
  if (!v.is_array()) throw ConfigError(where + "." + key + " must be a list");
  try {
    return v.get<std::vector<T>>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong element type");
  }
}

// Library errors raised while checking a config surface as ConfigError.
template <class F>
auto as_config_error(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

const std::initializer_list<std::string_view> kLoopKeys = {
    "n_nodes",     "loop_gain", "input_gain", "nonlinearity",
    "filter_taps", "noise_std", "mask_seed",  "mask_distribution"};

DataConfig parse_data(const json& j) {
  DataConfig d;
  const std::string where = "data";
  if (!j.is_object()) throw ConfigError("data must be an object");
  const auto source = read<std::string>(j, "source", "wiprec", where);
  if (source == "wiprec") {
    check_keys(j, {"source", "bursts_per_class", "clean", "snr_db", "bw_normalized", "seed",
                   "test_fraction", "burst_length", "devices_per_class", "bandwidth_target",
                   "residual_offset"},
               where);
    auto& w = d.wiprec;
    d.source = DataSource::wiprec;
    w.bursts_per_class = read(j, "bursts_per_class", w.bursts_per_class, where);
    w.clean = read(j, "clean", w.clean, where);
    w.snr_db = read(j, "snr_db", w.snr_db, where);
    w.bw_normalized = read(j, "bw_normalized", w.bw_normalized, where);
    w.seed = read(j, "seed", w.seed, where);
    w.test_fraction = read(j, "test_fraction", w.test_fraction, where);
    w.burst_length = read(j, "burst_length", w.burst_length, where);
    w.devices_per_class = read(j, "devices_per_class", w.devices_per_class, where);
    w.bandwidth.target = read(j, "bandwidth_target", w.bandwidth.target, where);
    w.residual_offset = read(j, "residual_offset", w.residual_offset, where);
  } else if (source == "sei") {
    check_keys(j, {"source", "n_devices", "bursts_per_device", "snr_db", "seed",
                   "test_fraction", "burst_length"},
               where);
    auto& s = d.sei;
    d.source = DataSource::sei;
    s.n_devices = read(j, "n_devices", s.n_devices, where);
    s.bursts_per_device = read(j, "bursts_per_device", s.bursts_per_device, where);
    s.snr_db = read(j, "snr_db", s.snr_db, where);
    s.seed = read(j, "seed", s.seed, where);
    s.test_fraction = read(j, "test_fraction", s.test_fraction, where);
    s.burst_length = read(j, "burst_length", s.burst_length, where);
  } else if (source == "file") {
    check_keys(j, {"source", "path"}, where);
    d.source = DataSource::file;
    d.path = read<std::string>(j, "path", "", where);
    if (d.path.empty()) throw ConfigError("data.path is required for source 'file'");
  } else {
    throw ConfigError("unknown data source '" + source + "'");
  }
  return d;
}

json data_to_json(const DataConfig& d) {
  switch (d.source) {
    case DataSource::wiprec: {
      const auto& w = d.wiprec;
      return {{"source", "wiprec"},
              {"bursts_per_class", w.bursts_per_class},
              {"clean", w.clean},
              {"snr_db", w.snr_db},
              {"bw_normalized", w.bw_normalized},
              {"seed", w.seed},
              {"test_fraction", w.test_fraction},
              {"burst_length", w.burst_length},
              {"devices_per_class", w.devices_per_class},
              {"bandwidth_target", w.bandwidth.target},
              {"residual_offset", w.residual_offset}};
    }
    case DataSource::sei: {
      const auto& s = d.sei;
      return {{"source", "sei"},
              {"n_devices", s.n_devices},
              {"bursts_per_device", s.bursts_per_device},
              {"snr_db", s.snr_db},
              {"seed", s.seed},
              {"test_fraction", s.test_fraction},
              {"burst_length", s.burst_length}};
    }
    case DataSource::file:
      return {{"source", "file"}, {"path", d.path}};
  }
  return {};
}

hyperopt::ParamDomain parse_domain(const std::string& name, const json& j) {
  const std::string where = "hyperopt.space." + name;
  check_keys(j, {"log", "range", "values", "choices"}, where);
  if (j.size() != 1) throw ConfigError(where + " needs exactly one of log/range/values/choices");
  try {
    if (j.contains("log")) {
      const auto b = j.at("log").get<std::vector<double>>();
      if (b.size() != 2) throw ConfigError(where + ".log needs [lo, hi]");
      return hyperopt::ParamDomain::log_scale(name, b[0], b[1]);
    }
    if (j.contains("range")) {
      const auto b = j.at("range").get<std::vector<double>>();
      if (b.size() != 2) throw ConfigError(where + ".range needs [lo, hi]");
      return hyperopt::ParamDomain::continuous(name, b[0], b[1]);
    }
    if (j.contains("values"))
      return hyperopt::ParamDomain::integers(name, j.at("values").get<std::vector<double>>());
    return hyperopt::ParamDomain::categorical(name,
                                              j.at("choices").get<std::vector<std::string>>());
  } catch (const json::exception&) {
    throw ConfigError(where + " has the wrong type");
  } catch (const InvalidArgument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

json domain_to_json(const hyperopt::ParamDomain& d) {
  switch (d.kind) {
    case hyperopt::DomainKind::log_continuous:
      return {{"log", {d.lo, d.hi}}};
    case hyperopt::DomainKind::continuous:
      return {{"range", {d.lo, d.hi}}};
    case hyperopt::DomainKind::integer_set:
      return {{"values", d.values}};
    case hyperopt::DomainKind::categorical:
      return {{"choices", d.categories}};
  }
  return {};
}

std::uint64_t base_mask_seed(const ExperimentConfig& c) {
  return c.topology.mask_seed.value_or(derive_seed(c.seed, {kMaskStream}));
}

// Applies `f` to every loop description of the config.
void for_each_loop(ExperimentConfig& c, const std::function<void(reservoir::LoopSpec&)>& f,
                   const std::function<void(json&)>& g) {
  f(c.topology.loop);
  if (c.topology.layers) {
    for (auto& layer : (*c.topology.layers)["layers"])
      for (auto& loop : layer["loops"]) g(loop);
  }
}

}  // namespace

std::string_view to_string(ModelKind m) noexcept {
  return m == ModelKind::dlr ? "dlr" : "raw_rr";
}

ModelKind parse_model(std::string_view name) {
  if (name == "dlr") return ModelKind::dlr;
  if (name == "raw_rr") return ModelKind::raw_rr;
  throw ConfigError("unknown model '" + std::string(name) + "' (expected dlr or raw_rr)");
}

std::size_t ExperimentConfig::burst_length() const noexcept {
  switch (data.source) {
    case DataSource::wiprec:
      return data.wiprec.burst_length;
    case DataSource::sei:
      return data.sei.burst_length;
    case DataSource::file:
      break;
  }
  return synthrf::kBurstLength;
}

json to_json(const reservoir::LoopSpec& s) {
  return {{"n_nodes", s.n_nodes},
          {"loop_gain", s.loop_gain},
          {"input_gain", s.input_gain},
          {"nonlinearity", reservoir::to_string(s.nonlinearity)},
          {"filter_taps", {s.filter_taps[0], s.filter_taps[1]}},
          {"noise_std", s.noise_std},
          {"mask_seed", s.mask_seed},
          {"mask_distribution", reservoir::to_string(s.mask_distribution)}};
}

reservoir::LoopSpec loop_from_json(const json& j, const reservoir::LoopSpec& defaults) {
  const std::string where = "loop";
  reservoir::LoopSpec s = defaults;
  s.n_nodes = read(j, "n_nodes", s.n_nodes, where);
  s.loop_gain = read(j, "loop_gain", s.loop_gain, where);
  s.input_gain = read(j, "input_gain", s.input_gain, where);
  s.noise_std = read(j, "noise_std", s.noise_std, where);
  s.mask_seed = read(j, "mask_seed", s.mask_seed, where);
  if (j.contains("filter_taps")) {
    const auto taps = read_list<double>(j, "filter_taps", where);
    if (taps.size() != 2) throw ConfigError("loop.filter_taps needs two values");
    s.filter_taps = {taps[0], taps[1]};
  }
  as_config_error(where, [&] {
    if (j.contains("nonlinearity"))
      s.nonlinearity = reservoir::parse_nonlinearity(read<std::string>(j, "nonlinearity", "", where));
    if (j.contains("mask_distribution"))
      s.mask_distribution =
          reservoir::parse_mask_distribution(read<std::string>(j, "mask_distribution", "", where));
    return 0;
  });
  return s;
}

json to_json(const transforms::TransformSpec& s) {
  json j = {{"kind", transforms::to_string(s.kind)}};
  switch (s.kind) {
    case transforms::TransformKind::amplitude_subburst:
      j["length"] = s.length;
      if (s.offset) j["offset"] = *s.offset;
      break;
    case transforms::TransformKind::decimated_dft:
      j["decimation"] = s.decimation;
      break;
    case transforms::TransformKind::kay_freq:
      j["stride"] = s.stride;
      break;
    default:
      break;
  }
  return j;
}

transforms::TransformSpec transform_from_json(const json& j) {
  const std::string where = "transform";
  check_keys(j, {"kind", "offset", "length", "decimation", "stride"}, where);
  transforms::TransformSpec s;
  if (!j.contains("kind")) throw ConfigError("transform.kind is required");
  s.kind = as_config_error(where, [&] {
    return transforms::parse_transform_kind(read<std::string>(j, "kind", "", where));
  });
  if (j.contains("offset")) s.offset = read<std::size_t>(j, "offset", 0, where);
  s.length = read(j, "length", s.length, where);
  s.decimation = read(j, "decimation", s.decimation, where);
  s.stride = read(j, "stride", s.stride, where);
  return s;
}

json to_json(const topology::TopologySpec& spec) {
  json layers = json::array();
  for (const auto& bank : spec.layers) {
    json loops = json::array();
    for (const auto& slot : bank.loops) {
      json l = to_json(slot.spec);
      l["begin"] = slot.begin;
      l["end"] = slot.end;
      loops.push_back(std::move(l));
    }
    layers.push_back({{"loops", std::move(loops)}});
  }
  return {{"layers", std::move(layers)}, {"combiner", topology::to_string(spec.combiner)}};
}

topology::TopologySpec topology_from_json(const json& j) {
  check_keys(j, {"layers", "combiner"}, "topology");
  topology::TopologySpec spec;
  spec.combiner = as_config_error("topology", [&] {
    return topology::parse_combiner(read<std::string>(j, "combiner", "sum", "topology"));
  });
  if (!j.contains("layers") || !j.at("layers").is_array())
    throw ConfigError("topology.layers must be a list");
  for (const auto& layer : j.at("layers")) {
    check_keys(layer, {"loops"}, "topology layer");
    if (!layer.contains("loops") || !layer.at("loops").is_array())
      throw ConfigError("topology layer needs a 'loops' list");
    topology::LoopBank bank;
    for (const auto& loop : layer.at("loops")) {
      std::initializer_list<std::string_view> keys = {
          "begin",     "end",          "n_nodes",   "loop_gain",
          "input_gain", "nonlinearity", "filter_taps", "noise_std",
          "mask_seed", "mask_distribution"};
      check_keys(loop, keys, "topology loop");
      topology::LoopSlot slot;
      slot.spec = loop_from_json(loop);
      if (!loop.contains("begin") || !loop.contains("end"))
        throw ConfigError("topology loop needs begin and end");
      slot.begin = read<std::size_t>(loop, "begin", 0, "topology loop");
      slot.end = read<std::size_t>(loop, "end", 0, "topology loop");
      bank.loops.push_back(std::move(slot));
    }
    spec.layers.push_back(std::move(bank));
  }
  return spec;
}

ExperimentConfig parse_config(const json& j) {
  check_keys(j, {"name", "seed", "data", "transforms", "model", "topology", "input_gain_mode",
                 "lambda", "sweep", "hyperopt", "report", "output_dir", "threads"},
             "config");
  ExperimentConfig c;
  const std::string where = "config";
  c.name = read(j, "name", c.name, where);
  c.seed = read(j, "seed", c.seed, where);
  if (j.contains("data")) c.data = parse_data(j.at("data"));
  if (j.contains("transforms")) {
    const auto& list = j.at("transforms");
    if (!list.is_array() || list.empty())
      throw ConfigError("transforms must be a non-empty list");
    c.transforms.clear();
    for (const auto& t : list) c.transforms.push_back(transform_from_json(t));
  }
  c.model = parse_model(read<std::string>(j, "model", "dlr", where));
  if (j.contains("topology")) {
    const auto& t = j.at("topology");
    check_keys(t, {"split", "per_transform_split", "combiner", "loop", "layers"}, "topology");
    if (t.contains("loop")) {
      check_keys(t.at("loop"), kLoopKeys, "topology.loop");
      c.topology.loop = loop_from_json(t.at("loop"));
      if (t.at("loop").contains("mask_seed"))
        c.topology.mask_seed = c.topology.loop.mask_seed;
    }
    c.topology.split = read(t, "split", c.topology.split, "topology");
    c.topology.per_transform_split = read_list<std::size_t>(t, "per_transform_split", "topology");
    c.topology.combiner = as_config_error("topology", [&] {
      return topology::parse_combiner(read<std::string>(t, "combiner", "sum", "topology"));
    });
    if (t.contains("layers")) {
      json layers = {{"layers", t.at("layers")}, {"combiner", topology::to_string(c.topology.combiner)}};
      (void)topology_from_json(layers);  // key and type check
      c.topology.layers = std::move(layers);
    }
  }
  const auto gain_mode = read<std::string>(j, "input_gain_mode", "absolute", where);
  if (gain_mode == "absolute") {
    c.input_gain_mode = GainMode::absolute;
  } else if (gain_mode == "normalized") {
    c.input_gain_mode = GainMode::normalized;
  } else {
    throw ConfigError("input_gain_mode must be 'absolute' or 'normalized'");
  }
  c.lambda = read(j, "lambda", c.lambda, where);
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    check_keys(s, {"n_nodes", "k", "decimation", "lambda", "noise_std", "seeds", "models",
                   "transforms"},
               "sweep");
    SweepConfig sw;
    sw.n_nodes = read_list<std::size_t>(s, "n_nodes", "sweep");
    sw.k = read_list<std::size_t>(s, "k", "sweep");
    sw.decimation = read_list<std::size_t>(s, "decimation", "sweep");
    sw.lambda = read_list<double>(s, "lambda", "sweep");
    sw.noise_std = read_list<double>(s, "noise_std", "sweep");
    sw.seeds = read_list<std::uint64_t>(s, "seeds", "sweep");
    for (const auto& m : read_list<std::string>(s, "models", "sweep"))
      sw.models.push_back(parse_model(m));
    sw.transforms = read_list<std::string>(s, "transforms", "sweep");
    c.sweep = std::move(sw);
  }
  if (j.contains("hyperopt")) {
    const auto& h = j.at("hyperopt");
    check_keys(h, {"method", "space", "budget", "initial_design", "levels", "points_per_axis",
                   "validation_fraction"},
               "hyperopt");
    HyperoptConfig hc;
    const auto method = read<std::string>(h, "method", "bayes", "hyperopt");
    if (method == "bayes") {
      hc.method = HyperoptConfig::Method::bayes;
    } else if (method == "grid") {
      hc.method = HyperoptConfig::Method::grid;
    } else {
      throw ConfigError("hyperopt.method must be 'bayes' or 'grid'");
    }
    if (!h.contains("space") || !h.at("space").is_object() || h.at("space").empty())
      throw ConfigError("hyperopt.space must be a non-empty object");
    for (const auto& item : h.at("space").items()) {
      const auto& names = tunable_parameters();
      if (std::find(names.begin(), names.end(), item.key()) == names.end())
        throw ConfigError("hyperopt.space: '" + item.key() + "' is not tunable");
      hc.space.push_back(parse_domain(item.key(), item.value()));
    }
    hc.budget = read(h, "budget", hc.budget, "hyperopt");
    hc.initial_design = read(h, "initial_design", hc.initial_design, "hyperopt");
    hc.levels = read(h, "levels", hc.levels, "hyperopt");
    hc.points_per_axis = read(h, "points_per_axis", hc.points_per_axis, "hyperopt");
    hc.validation_fraction = read(h, "validation_fraction", hc.validation_fraction, "hyperopt");
    c.hyperopt = std::move(hc);
  }
  if (j.contains("report")) {
    const auto& r = j.at("report");
    check_keys(r, {"params_ratio", "macs_ratio", "latency_ratio", "baseline_params",
                   "baseline_macs", "baseline_latency_seconds"},
               "report");
    c.report.params_ratio = read(r, "params_ratio", c.report.params_ratio, "report");
    c.report.macs_ratio = read(r, "macs_ratio", c.report.macs_ratio, "report");
    c.report.latency_ratio = read(r, "latency_ratio", c.report.latency_ratio, "report");
    if (r.contains("baseline_params"))
      c.report.baseline_params = read(r, "baseline_params", 0.0, "report");
    if (r.contains("baseline_macs"))
      c.report.baseline_macs = read(r, "baseline_macs", 0.0, "report");
    if (r.contains("baseline_latency_seconds"))
      c.report.baseline_latency_seconds = read(r, "baseline_latency_seconds", 0.0, "report");
  }
  c.output_dir = read(j, "output_dir", c.output_dir, where);
  c.threads = read(j, "threads", c.threads, where);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["data"] = data_to_json(c.data);
  j["transforms"] = json::array();
  for (const auto& t : c.transforms) j["transforms"].push_back(to_json(t));
  j["model"] = to_string(c.model);
  json loop = to_json(c.topology.loop);
  if (c.topology.mask_seed) {
    loop["mask_seed"] = *c.topology.mask_seed;
  } else {
    loop.erase("mask_seed");
  }
  json topo = {{"loop", loop},
               {"split", c.topology.split},
               {"combiner", topology::to_string(c.topology.combiner)}};
  if (!c.topology.per_transform_split.empty())
    topo["per_transform_split"] = c.topology.per_transform_split;
  if (c.topology.layers) topo["layers"] = c.topology.layers->at("layers");
  j["topology"] = std::move(topo);
  j["input_gain_mode"] = c.input_gain_mode == GainMode::absolute ? "absolute" : "normalized";
  j["lambda"] = c.lambda;
  if (c.sweep) {
    const auto& s = *c.sweep;
    json sj = json::object();
    if (!s.n_nodes.empty()) sj["n_nodes"] = s.n_nodes;
    if (!s.k.empty()) sj["k"] = s.k;
    if (!s.decimation.empty()) sj["decimation"] = s.decimation;
    if (!s.lambda.empty()) sj["lambda"] = s.lambda;
    if (!s.noise_std.empty()) sj["noise_std"] = s.noise_std;
    if (!s.seeds.empty()) sj["seeds"] = s.seeds;
    if (!s.models.empty()) {
      sj["models"] = json::array();
      for (auto m : s.models) sj["models"].push_back(to_string(m));
    }
    if (!s.transforms.empty()) sj["transforms"] = s.transforms;
    j["sweep"] = std::move(sj);
  }
  if (c.hyperopt) {
    const auto& h = *c.hyperopt;
    json space = json::object();
    for (const auto& d : h.space) space[d.name] = domain_to_json(d);
    j["hyperopt"] = {{"method", h.method == HyperoptConfig::Method::bayes ? "bayes" : "grid"},
                     {"space", std::move(space)},
                     {"budget", h.budget},
                     {"initial_design", h.initial_design},
                     {"levels", h.levels},
                     {"points_per_axis", h.points_per_axis},
                     {"validation_fraction", h.validation_fraction}};
  }
  json report = {{"params_ratio", c.report.params_ratio},
                 {"macs_ratio", c.report.macs_ratio},
                 {"latency_ratio", c.report.latency_ratio}};
  if (c.report.baseline_params) report["baseline_params"] = *c.report.baseline_params;
  if (c.report.baseline_macs) report["baseline_macs"] = *c.report.baseline_macs;
  if (c.report.baseline_latency_seconds)
    report["baseline_latency_seconds"] = *c.report.baseline_latency_seconds;
  j["report"] = std::move(report);
  j["output_dir"] = c.output_dir;
  j["threads"] = c.threads;
  return j;
}

std::vector<std::size_t> segment_lengths(const ExperimentConfig& c, std::size_t burst_length) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < c.transforms.size(); ++i) {
    out.push_back(as_config_error("transform " + std::to_string(i), [&] {
      return c.transforms[i].output_length(burst_length);
    }));
  }
  return out;
}

topology::TopologySpec build_topology(const ExperimentConfig& c, std::size_t burst_length) {
  const auto segments = segment_lengths(c, burst_length);
  const std::uint64_t base = base_mask_seed(c);
  if (c.topology.layers) {
    auto spec = topology_from_json(*c.topology.layers);
    std::size_t index = 0;
    for (std::size_t r = 0; r < spec.layers.size(); ++r) {
      const auto& layer_json = c.topology.layers->at("layers")[r]["loops"];
      for (std::size_t i = 0; i < spec.layers[r].loops.size(); ++i, ++index) {
        if (!layer_json[i].contains("mask_seed")) spec.layers[r].loops[i].spec.mask_seed = base + index;
      }
    }
    return spec;
  }
  const auto& splits = c.topology.per_transform_split;
  if (!splits.empty() && splits.size() != segments.size())
    throw ConfigError("topology.per_transform_split has " + std::to_string(splits.size()) +
                      " entries for " + std::to_string(segments.size()) + " transforms");
  topology::TopologySpec spec;
  spec.combiner = c.topology.combiner;
  topology::LoopBank bank;
  std::size_t offset = 0;
  for (std::size_t t = 0; t < segments.size(); ++t) {
    const std::size_t k = splits.empty() ? c.topology.split : splits[t];
    reservoir::LoopSpec proto = c.topology.loop;
    proto.mask_seed = base + bank.loops.size();
    auto part = as_config_error("transform " + std::to_string(t) + " split", [&] {
      return topology::make_split_bank(proto, segments[t], k, offset);
    });
    bank.loops.insert(bank.loops.end(), part.loops.begin(), part.loops.end());
    offset += segments[t];
  }
  spec.layers.push_back(std::move(bank));
  return spec;
}

void validate(const ExperimentConfig& c, std::size_t burst_length) {
  if (c.threads == 0) throw ConfigError("threads must be >= 1");
  if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda))
    throw ConfigError("lambda must be finite and >= 0");
  if (c.transforms.empty()) throw ConfigError("at least one transform is required");
  switch (c.data.source) {
    case DataSource::wiprec: {
      const auto& w = c.data.wiprec;
      if (w.bursts_per_class < 2) throw ConfigError("data.bursts_per_class must be >= 2");
      if (!(w.test_fraction > 0.0 && w.test_fraction < 1.0))
        throw ConfigError("data.test_fraction must be in (0, 1)");
      if (w.burst_length < 64) throw ConfigError("data.burst_length must be >= 64");
      break;
    }
    case DataSource::sei: {
      const auto& s = c.data.sei;
      if (s.n_devices < 2) throw ConfigError("data.n_devices must be >= 2");
      if (s.bursts_per_device < 2) throw ConfigError("data.bursts_per_device must be >= 2");
      if (!(s.test_fraction > 0.0 && s.test_fraction < 1.0))
        throw ConfigError("data.test_fraction must be in (0, 1)");
      if (s.burst_length < 64) throw ConfigError("data.burst_length must be >= 64");
      break;
    }
    case DataSource::file:
      break;
  }
  const auto segments = segment_lengths(c, burst_length);
  std::size_t total = 0;
  for (auto s : segments) total += s;
  if (c.model == ModelKind::dlr || c.topology.layers) {
    const auto spec = build_topology(c, burst_length);
    as_config_error("topology", [&] {
      spec.validate();
      return 0;
    });
    const std::size_t input = as_config_error("topology", [&] { return spec.input_length(); });
    if (input != total)
      throw ConfigError("topology reads " + std::to_string(input) +
                        " values but the transforms produce " + std::to_string(total));
  } else {
    as_config_error("topology.loop", [&] {
      c.topology.loop.validate();
      return 0;
    });
  }
  if (c.hyperopt) {
    const auto& h = *c.hyperopt;
    if (!(h.validation_fraction > 0.0 && h.validation_fraction < 1.0))
      throw ConfigError("hyperopt.validation_fraction must be in (0, 1)");
    if (h.method == HyperoptConfig::Method::bayes && h.budget < h.initial_design)
      throw ConfigError("hyperopt.budget must be >= initial_design");
  }
  if (c.sweep) {
    for (double l : c.sweep->lambda)
      if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("sweep.lambda must be >= 0");
  }
}

std::vector<SweepPoint> expand_sweep(const ExperimentConfig& c, std::size_t burst_length) {
  std::vector<SweepPoint> points{{c, json::object()}};
  points.front().config.sweep.reset();
  if (!c.sweep) {
    validate(points.front().config, burst_length);
    return points;
  }
  const auto& s = *c.sweep;
  auto expand = [&](const char* axis, std::size_t count, auto&& apply) {
    if (count == 0) return;
    std::vector<SweepPoint> next;
    for (const auto& p : points) {
      for (std::size_t i = 0; i < count; ++i) {
        SweepPoint q = p;
        apply(q, i);
        next.push_back(std::move(q));
      }
    }
    (void)axis;
    points = std::move(next);
  };
  expand("transform", s.transforms.size(), [&](SweepPoint& p, std::size_t i) {
    if (p.config.transforms.size() != 1)
      throw ConfigError("sweep.transforms needs exactly one configured transform");
    p.config.transforms[0].kind = as_config_error("sweep.transforms", [&] {
      return transforms::parse_transform_kind(s.transforms[i]);
    });
    p.axes["transform"] = s.transforms[i];
  });
  expand("decimation", s.decimation.size(), [&](SweepPoint& p, std::size_t i) {
    bool any = false;
    for (auto& t : p.config.transforms) {
      if (t.kind == transforms::TransformKind::decimated_dft) {
        t.decimation = s.decimation[i];
        any = true;
      }
    }
    if (!any) throw ConfigError("sweep.decimation needs a decimated_dft transform");
    p.axes["decimation"] = s.decimation[i];
  });
  expand("k", s.k.size(), [&](SweepPoint& p, std::size_t i) {
    if (p.config.topology.layers) throw ConfigError("sweep.k needs the shorthand topology");
    p.config.topology.split = s.k[i];
    p.config.topology.per_transform_split.clear();
    p.axes["k"] = s.k[i];
  });
  expand("n_nodes", s.n_nodes.size(), [&](SweepPoint& p, std::size_t i) {
    for_each_loop(
        p.config, [&](reservoir::LoopSpec& l) { l.n_nodes = s.n_nodes[i]; },
        [&](json& l) { l["n_nodes"] = s.n_nodes[i]; });
    p.axes["n_nodes"] = s.n_nodes[i];
  });
  expand("noise_std", s.noise_std.size(), [&](SweepPoint& p, std::size_t i) {
    for_each_loop(
        p.config, [&](reservoir::LoopSpec& l) { l.noise_std = s.noise_std[i]; },
        [&](json& l) { l["noise_std"] = s.noise_std[i]; });
    p.axes["noise_std"] = s.noise_std[i];
  });
  expand("seed", s.seeds.size(), [&](SweepPoint& p, std::size_t i) {
    p.config.seed = s.seeds[i];
    p.axes["seed"] = s.seeds[i];
  });
  for (auto& p : points) {
    for (auto m : s.models.empty() ? std::vector<ModelKind>{p.config.model} : s.models) {
      ExperimentConfig check = p.config;
      check.model = m;
      validate(check, burst_length);
    }
  }
  return points;
}

const std::vector<std::string>& tunable_parameters() {
  static const std::vector<std::string> names = {
      "input_gain", "loop_gain", "n_nodes",  "k",         "lambda",       "decimation",
      "noise_std",  "stride",    "subburst_length", "filter_h1", "transform", "combiner",
      "nonlinearity"};
  return names;
}

ExperimentConfig with_params(const ExperimentConfig& base, const hyperopt::ParamPoint& point,
                             const std::vector<hyperopt::ParamDomain>& space) {
  ExperimentConfig c = base;
  auto category = [&](const std::string& name, double v) -> std::string {
    for (const auto& d : space) {
      if (d.name == name && d.kind == hyperopt::DomainKind::categorical) {
        const auto idx = static_cast<std::size_t>(std::llround(v));
        if (idx >= d.categories.size()) throw ConfigError("category index out of range for " + name);
        return d.categories[idx];
      }
    }
    throw ConfigError(name + " must be categorical");
  };
  auto whole = [](double v) { return static_cast<std::size_t>(std::llround(v)); };
  for (const auto& [name, v] : point) {
    if (name == "input_gain") {
      for_each_loop(c, [&](reservoir::LoopSpec& l) { l.input_gain = v; },
                    [&](json& l) { l["input_gain"] = v; });
    } else if (name == "loop_gain") {
      for_each_loop(c, [&](reservoir::LoopSpec& l) { l.loop_gain = v; },
                    [&](json& l) { l["loop_gain"] = v; });
    } else if (name == "noise_std") {
      for_each_loop(c, [&](reservoir::LoopSpec& l) { l.noise_std = v; },
                    [&](json& l) { l["noise_std"] = v; });
    } else if (name == "n_nodes") {
      for_each_loop(c, [&](reservoir::LoopSpec& l) { l.n_nodes = whole(v); },
                    [&](json& l) { l["n_nodes"] = whole(v); });
    } else if (name == "filter_h1") {
      for_each_loop(c, [&](reservoir::LoopSpec& l) { l.filter_taps = {1.0 - v, v}; },
                    [&](json& l) { l["filter_taps"] = {1.0 - v, v}; });
    } else if (name == "nonlinearity") {
      const auto nl = category(name, v);
      for_each_loop(
          c,
          [&](reservoir::LoopSpec& l) {
            l.nonlinearity = as_config_error(name, [&] { return reservoir::parse_nonlinearity(nl); });
          },
          [&](json& l) { l["nonlinearity"] = nl; });
    } else if (name == "k") {
      if (c.topology.layers) throw ConfigError("k needs the shorthand topology");
      c.topology.split = whole(v);
      c.topology.per_transform_split.clear();
    } else if (name == "lambda") {
      c.lambda = v;
    } else if (name == "decimation") {
      for (auto& t : c.transforms)
        if (t.kind == transforms::TransformKind::decimated_dft) t.decimation = whole(v);
    } else if (name == "stride") {
      for (auto& t : c.transforms)
        if (t.kind == transforms::TransformKind::kay_freq) t.stride = whole(v);
    } else if (name == "subburst_length") {
      for (auto& t : c.transforms)
        if (t.kind == transforms::TransformKind::amplitude_subburst) t.length = whole(v);
    } else if (name == "transform") {
      if (c.transforms.size() != 1) throw ConfigError("transform needs exactly one transform");
      const auto kind = category(name, v);
      c.transforms[0].kind = as_config_error(name, [&] { return transforms::parse_transform_kind(kind); });
    } else if (name == "combiner") {
      const auto comb = category(name, v);
      c.topology.combiner = as_config_error(name, [&] { return topology::parse_combiner(comb); });
      if (c.topology.layers) (*c.topology.layers)["combiner"] = comb;
    } else {
      throw ConfigError("'" + name + "' is not tunable");
    }
  }
  return c;
}

}  // namespace dlr::config
