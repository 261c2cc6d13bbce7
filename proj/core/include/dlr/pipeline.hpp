#pragma once

// Experiment runner: transforms -> loops -> ridge readout, plus sweeps and
// hyperparameter search over the same path.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dlr/artifact.hpp"
#include "dlr/classifier.hpp"
#include "dlr/config.hpp"
#include "dlr/hyperopt.hpp"
#include "dlr/synthrf.hpp"

namespace dlr::pipeline {

/// Calls fn(i) for every i < n on up to `threads` workers. Each index is
/// handled exactly once and results are written by index, so output does
/// not depend on the thread count. The first exception is rethrown.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

/// Generates (synthrf sources) or loads (file source) the dataset.
[[nodiscard]] synthrf::Dataset load_data(const config::ExperimentConfig& config);

/// Concatenated transform outputs for one burst.
[[nodiscard]] RealSeries datapoint(const artifact::ModelArtifact& model, const IQBurst& burst);

/// Classifier input for one burst: the joint state vector (dlr) or the
/// average-pooled datapoint (raw_rr).
[[nodiscard]] std::vector<double> features(const artifact::ModelArtifact& model,
                                           const IQBurst& burst);

/// Feature rows for the selected bursts.
[[nodiscard]] Eigen::MatrixXd feature_matrix(const artifact::ModelArtifact& model,
                                             std::span<const IQBurst> bursts,
                                             std::span<const std::size_t> indices,
                                             std::size_t threads);

/// `length` means of contiguous, near-equal pieces of x (identity when
/// length >= x.size()).
[[nodiscard]] std::vector<double> average_pool(std::span<const double> x, std::size_t length);

struct TrainingResult {
  artifact::ModelArtifact model;
  classifier::Metrics metrics;  ///< held-out split
  double train_accuracy = 0.0;
  double train_seconds = 0.0;  ///< training features + ridge; no data generation
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t classifier_dim = 0;
  std::uint64_t training_macs = 0;
  std::uint64_t trainable_params = 0;
};

/// Fits the feature stage (amplitude profile, gain calibration, masks) on the
/// training bursts; the readout is left empty.
[[nodiscard]] artifact::ModelArtifact prepare_model(const config::ExperimentConfig& config,
                                                    const synthrf::Dataset& data,
                                                    std::span<const std::size_t> train,
                                                    std::size_t threads);

/// Full training run on the dataset's own split (or the given one).
[[nodiscard]] TrainingResult run_training(
    const config::ExperimentConfig& config, const synthrf::Dataset& data,
    std::optional<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> split = {});
[[nodiscard]] TrainingResult run_training(const config::ExperimentConfig& config);

/// Metrics file contents. Timing is kept under "timing" so the remaining
/// fields are byte-identical across repeated runs.
[[nodiscard]] nlohmann::json metrics_json(const TrainingResult& result,
                                          const config::ExperimentConfig& config);

struct InferenceResult {
  std::vector<classifier::Prediction> predictions;
  std::optional<classifier::Metrics> metrics;  ///< when labels are available
};

[[nodiscard]] InferenceResult run_inference(const artifact::ModelArtifact& model,
                                            std::span<const IQBurst> bursts,
                                            std::span<const std::size_t> labels = {},
                                            std::size_t threads = 1);
[[nodiscard]] InferenceResult run_inference(const std::filesystem::path& model_path,
                                            const std::filesystem::path& iq_path,
                                            std::size_t threads = 1);

/// One row of a sweep table.
struct SweepRow {
  std::string transform;
  std::size_t n_nodes = 0;
  std::size_t k = 0;
  std::size_t decimation = 0;
  double noise_std = 0.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::string model;
  double accuracy = 0.0;
  double train_seconds = 0.0;
  std::size_t classifier_dim = 0;
  std::uint64_t training_macs = 0;
  std::uint64_t trainable_params = 0;
};

/// Column order of the sweep CSV.
[[nodiscard]] const std::vector<std::string>& sweep_columns();
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

using SweepCallback = std::function<void(const SweepRow&)>;

/// Runs every sweep point; lambda and model axes reuse one feature pass.
[[nodiscard]] std::vector<SweepRow> run_sweep(const config::ExperimentConfig& config,
                                              const synthrf::Dataset& data,
                                              const SweepCallback& on_row = {});

struct HyperoptOutcome {
  hyperopt::SearchResult search;
  config::ExperimentConfig best_config;
};

/// Tunes config.hyperopt.space on a stratified validation split carved out
/// of the training indices; the test split is never touched.
[[nodiscard]] HyperoptOutcome run_hyperopt(const config::ExperimentConfig& config,
                                           const synthrf::Dataset& data,
                                           const hyperopt::TrialCallback& on_trial = {});

}  // namespace dlr::pipeline
