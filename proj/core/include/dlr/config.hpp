#pragma once

// Experiment configuration (JSON). Parsing is closed-world: unknown keys are
// rejected with ConfigError, and every length relation between transforms,
// topology slices and masks is checked before any computation.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dlr/hyperopt.hpp"
#include "dlr/reservoir.hpp"
#include "dlr/synthrf.hpp"
#include "dlr/topology.hpp"
#include "dlr/transforms.hpp"

namespace dlr::config {

enum class DataSource { wiprec, sei, file };
enum class ModelKind { dlr, raw_rr };
/// absolute: nu as given. normalized: nu is divided by the RMS of each
/// transform segment over the training set, so one nu suits every transform.
enum class GainMode { absolute, normalized };

[[nodiscard]] std::string_view to_string(ModelKind m) noexcept;
[[nodiscard]] ModelKind parse_model(std::string_view name);

struct DataConfig {
  DataSource source = DataSource::wiprec;
  synthrf::WiprecOptions wiprec{};
  synthrf::SeiOptions sei{};
  std::string path;  ///< DataSource::file
};

struct TopologyConfig {
  /// Shorthand: every transform segment goes to `split` loops cloned from
  /// `loop` (per_transform_split overrides the count per segment).
  reservoir::LoopSpec loop{};
  std::size_t split = 1;
  std::vector<std::size_t> per_transform_split;
  topology::Combiner combiner = topology::Combiner::sum;
  /// Base mask seed; loop i of the shorthand gets base + i. Derived from
  /// the experiment seed when unset.
  std::optional<std::uint64_t> mask_seed;
  /// Explicit layers ({"loops": [{"begin", "end", loop fields...}]} each);
  /// replace the shorthand when present. Loops without a mask_seed get
  /// base + global loop index.
  std::optional<nlohmann::json> layers;
};

struct SweepConfig {
  std::vector<std::size_t> n_nodes;
  std::vector<std::size_t> k;
  std::vector<std::size_t> decimation;
  std::vector<double> lambda;
  std::vector<double> noise_std;
  std::vector<std::uint64_t> seeds;
  std::vector<ModelKind> models;
  std::vector<std::string> transforms;  ///< replaces the transform list kind
};

struct HyperoptConfig {
  enum class Method { grid, bayes } method = Method::bayes;
  std::vector<hyperopt::ParamDomain> space;
  std::size_t budget = 30;
  std::size_t initial_design = 8;
  std::size_t levels = 2;
  std::size_t points_per_axis = 5;
  double validation_fraction = 0.2;
};

/// Reference constants for the figure-of-merit table.
struct ReportConfig {
  double params_ratio = 20.0;
  double macs_ratio = 100.0;
  double latency_ratio = 1200.0;
  std::optional<double> baseline_params;
  std::optional<double> baseline_macs;
  std::optional<double> baseline_latency_seconds;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;  ///< masks, loop noise, hyperopt
  DataConfig data{};
  std::vector<transforms::TransformSpec> transforms{transforms::TransformSpec{}};
  ModelKind model = ModelKind::dlr;
  TopologyConfig topology{};
  GainMode input_gain_mode = GainMode::absolute;
  double lambda = 1e-3;
  std::optional<SweepConfig> sweep;
  std::optional<HyperoptConfig> hyperopt;
  ReportConfig report{};
  std::string output_dir = "out";
  std::size_t threads = 1;

  /// Burst length implied by the data source (file sources report the
  /// generator default until loaded).
  [[nodiscard]] std::size_t burst_length() const noexcept;
};

[[nodiscard]] ExperimentConfig parse_config(const nlohmann::json& j);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);
[[nodiscard]] nlohmann::json to_json(const ExperimentConfig& config);

/// Output length of each transform for the given burst length.
[[nodiscard]] std::vector<std::size_t> segment_lengths(const ExperimentConfig& config,
                                                       std::size_t burst_length);

/// Topology for the concatenated transform outputs. Mask seeds without an
/// explicit value derive from config.seed.
[[nodiscard]] topology::TopologySpec build_topology(const ExperimentConfig& config,
                                                    std::size_t burst_length);

/// Cross-checks every derived length. Throws ConfigError.
void validate(const ExperimentConfig& config, std::size_t burst_length);

/// One config per point of the sweep axes other than lambda and model
/// (those reuse state vectors and are looped over by the runner). Each
/// point is validated before anything is computed.
struct SweepPoint {
  ExperimentConfig config;
  nlohmann::json axes;  ///< axis name -> value for this point
};
[[nodiscard]] std::vector<SweepPoint> expand_sweep(const ExperimentConfig& config,
                                                   std::size_t burst_length);

/// Applies a hyperparameter point (names as in HyperoptConfig::space) to a
/// copy of the config.
[[nodiscard]] ExperimentConfig with_params(const ExperimentConfig& config,
                                           const hyperopt::ParamPoint& point,
                                           const std::vector<hyperopt::ParamDomain>& space);

/// Names accepted in a hyperopt search space.
[[nodiscard]] const std::vector<std::string>& tunable_parameters();

// JSON helpers shared with the model artifact.
[[nodiscard]] nlohmann::json to_json(const reservoir::LoopSpec& spec);
[[nodiscard]] reservoir::LoopSpec loop_from_json(const nlohmann::json& j,
                                                 const reservoir::LoopSpec& defaults = {});
[[nodiscard]] nlohmann::json to_json(const transforms::TransformSpec& spec);
[[nodiscard]] transforms::TransformSpec transform_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const topology::TopologySpec& spec);
[[nodiscard]] topology::TopologySpec topology_from_json(const nlohmann::json& j);

}  // namespace dlr::config
