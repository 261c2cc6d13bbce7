#include "dlr/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "dlr/error.hpp"
#include "dlr/iq_io.hpp"
#include "dlr/random.hpp"
#include "dlr/topology.hpp"
#include "dlr/transforms.hpp"

namespace dlr::pipeline {

using config::ExperimentConfig;
using config::ModelKind;
using nlohmann::json;

namespace {

constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;
constexpr std::uint64_t kValidationStream = 0x76616cULL;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context) {
  const std::string what = context + ": " + e.what();
  switch (e.code()) {
    case ErrorCode::invalid_argument:
      throw InvalidArgument(what);
    case ErrorCode::numeric_overflow:
      throw NumericOverflow(what);
    case ErrorCode::singular_matrix:
      throw SingularMatrix(what);
    case ErrorCode::config:
      throw ConfigError(what);
    case ErrorCode::data:
      throw DataError(what);
    case ErrorCode::format:
      throw FormatError(what);
  }
  throw Error(e.code(), what);
}

bool uses_profile(const std::vector<transforms::TransformSpec>& list) {
  return std::any_of(list.begin(), list.end(), [](const auto& t) {
    return t.kind == transforms::TransformKind::diff_fft;
  });
}

bool has_loop_noise(const topology::TopologySpec& spec) {
  for (const auto& bank : spec.layers)
    for (const auto& slot : bank.loops)
      if (slot.spec.noise_std > 0.0) return true;
  return false;
}

std::size_t common_burst_length(const synthrf::Dataset& data) {
  if (data.bursts.empty()) throw DataError("dataset is empty");
  const std::size_t length = data.bursts.front().size();
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.bursts[i].size() != length)
      throw DataError("burst " + std::to_string(i) + " has " +
                      std::to_string(data.bursts[i].size()) + " samples, expected " +
                      std::to_string(length));
  return length;
}

std::uint64_t dataset_hash(const synthrf::Dataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& b : data.bursts) h = fnv1a(b.samples.data(), b.samples.size() * sizeof(Complex), h);
  return fnv1a(data.labels.data(), data.labels.size() * sizeof(std::size_t), h);
}

class FeatureRunner {
 public:
  explicit FeatureRunner(const artifact::ModelArtifact& model) : model_(model) {
    if (model.model == ModelKind::dlr) {
      if (!model.topology) throw FormatError("dlr model without topology");
      topology_.emplace(*model.topology, model.masks);
      noisy_ = has_loop_noise(*model.topology);
    }
  }

  std::vector<double> operator()(const IQBurst& burst) const {
    const RealSeries dp = datapoint(model_, burst);
    if (model_.model == ModelKind::raw_rr) return average_pool(dp, model_.pool_size);
    std::optional<std::uint64_t> seed;
    if (noisy_) seed = derive_seed(model_.noise_seed, {fnv1a(dp.data(), dp.size() * sizeof(double))});
    return topology_->run(dp, seed).values;
  }

 private:
  const artifact::ModelArtifact& model_;
  std::optional<topology::Topology> topology_;
  bool noisy_ = false;
};

}  // namespace

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

synthrf::Dataset load_data(const ExperimentConfig& config) {
  switch (config.data.source) {
    case config::DataSource::wiprec:
      return synthrf::make_wiprec_dataset(config.data.wiprec);
    case config::DataSource::sei:
      return synthrf::make_sei_dataset(config.data.sei);
    case config::DataSource::file:
      return iq_io::load_dataset(config.data.path);
  }
  throw ConfigError("unknown data source");
}

RealSeries datapoint(const artifact::ModelArtifact& model, const IQBurst& burst) {
  if (burst.size() != model.burst_length)
    throw DataError("burst has " + std::to_string(burst.size()) + " samples, model expects " +
                    std::to_string(model.burst_length));
  const transforms::MeanAmplitudeProfile* profile = model.profile ? &*model.profile : nullptr;
  RealSeries out;
  for (const auto& t : model.transforms) {
    const auto part = transforms::apply(t, burst, profile);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<double> average_pool(std::span<const double> x, std::size_t length) {
  if (length == 0) throw InvalidArgument("pool length must be > 0");
  if (length >= x.size()) return {x.begin(), x.end()};
  std::vector<double> out(length);
  for (std::size_t j = 0; j < length; ++j) {
    const std::size_t lo = j * x.size() / length;
    const std::size_t hi = (j + 1) * x.size() / length;
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += x[i];
    out[j] = acc / static_cast<double>(hi - lo);
  }
  return out;
}

std::vector<double> features(const artifact::ModelArtifact& model, const IQBurst& burst) {
  return FeatureRunner(model)(burst);
}

Eigen::MatrixXd feature_matrix(const artifact::ModelArtifact& model,
                               std::span<const IQBurst> bursts,
                               std::span<const std::size_t> indices, std::size_t threads) {
  const FeatureRunner run(model);
  Eigen::MatrixXd rows;
  std::mutex shape_mutex;
  std::vector<std::vector<double>> out(indices.size());
  parallel_for(indices.size(), threads, [&](std::size_t i) {
    const std::size_t index = indices[i];
    try {
      out[i] = run(bursts[index]);
    } catch (const Error& e) {
      rethrow_with_context(e, "feature stage, datapoint " + std::to_string(index));
    }
  });
  if (out.empty()) return rows;
  rows.resize(static_cast<Eigen::Index>(out.size()), static_cast<Eigen::Index>(out.front().size()));
  for (std::size_t i = 0; i < out.size(); ++i)
    rows.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(out[i].data(), static_cast<Eigen::Index>(out[i].size()));
  return rows;
}

artifact::ModelArtifact prepare_model(const ExperimentConfig& config, const synthrf::Dataset& data,
                                      std::span<const std::size_t> train, std::size_t threads) {
  const std::size_t length = common_burst_length(data);
  config::validate(config, length);
  if (train.empty()) throw DataError("training split is empty");

  artifact::ModelArtifact model;
  model.model = config.model;
  model.burst_length = length;
  model.transforms = config.transforms;
  if (uses_profile(config.transforms)) {
    std::vector<IQBurst> training;
    training.reserve(train.size());
    for (auto i : train) training.push_back(data.bursts[i]);
    model.profile = transforms::compute_mean_amplitude(training);
  }
  const auto segments = config::segment_lengths(config, length);
  std::size_t total = 0;
  for (auto s : segments) total += s;

  auto spec = config::build_topology(config, length);
  if (config.model == ModelKind::raw_rr) {
    model.pool_size = std::min(spec.output_length(), total);
  } else {
    if (config.input_gain_mode == config::GainMode::normalized) {
      // Mean square of each datapoint position over the training set.
      std::vector<RealSeries> points(train.size());
      parallel_for(train.size(), threads, [&](std::size_t i) {
        try {
          points[i] = datapoint(model, data.bursts[train[i]]);
        } catch (const Error& e) {
          rethrow_with_context(e, "transform stage, datapoint " + std::to_string(train[i]));
        }
      });
      std::vector<double> square(total, 0.0);
      for (const auto& p : points)
        for (std::size_t i = 0; i < total; ++i) square[i] += p[i] * p[i];
      std::vector<std::size_t> segment_start{0};
      for (auto s : segments) segment_start.push_back(segment_start.back() + s);
      for (auto& slot : spec.layers.front().loops) {
        // RMS over the transform segment(s) the loop reads.
        std::size_t lo = slot.begin, hi = slot.end;
        for (std::size_t t = 0; t < segments.size(); ++t) {
          if (slot.begin >= segment_start[t] && slot.begin < segment_start[t + 1])
            lo = segment_start[t];
          if (slot.end > segment_start[t] && slot.end <= segment_start[t + 1])
            hi = segment_start[t + 1];
        }
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += square[i];
        const double rms =
            std::sqrt(acc / static_cast<double>((hi - lo) * train.size()));
        if (rms > 0.0 && std::isfinite(rms)) slot.spec.input_gain /= rms;
      }
    }
    const topology::Topology topo(spec);
    model.masks = topo.masks();
    model.topology = std::move(spec);
    model.noise_seed = derive_seed(config.seed, {kNoiseStream});
  }
  model.metadata = {{"config_name", config.name},
                    {"seed", config.seed},
                    {"input_gain_mode",
                     config.input_gain_mode == config::GainMode::absolute ? "absolute" : "normalized"},
                    {"dataset_hash", dataset_hash(data)},
                    {"dataset", data.generator}};
  return model;
}

TrainingResult run_training(
    const ExperimentConfig& config, const synthrf::Dataset& data,
    std::optional<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> split) {
  const auto& train = split ? split->first : data.train_indices;
  const auto& test = split ? split->second : data.test_indices;
  if (test.empty()) throw DataError("test split is empty");

  TrainingResult result;
  const auto t0 = Clock::now();
  result.model = prepare_model(config, data, train, config.threads);
  classifier::DesignMatrix design;
  design.rows = feature_matrix(result.model, data.bursts, train, config.threads);
  design.class_count = data.class_count();
  for (auto i : train) design.labels.push_back(data.labels[i]);
  try {
    result.model.ridge = classifier::train_ridge(design, config.lambda, data.class_names);
  } catch (const Error& e) {
    rethrow_with_context(e, "ridge stage");
  }
  result.train_seconds = seconds_since(t0);

  classifier::DesignMatrix held_out;
  held_out.rows = feature_matrix(result.model, data.bursts, test, config.threads);
  held_out.class_count = data.class_count();
  for (auto i : test) held_out.labels.push_back(data.labels[i]);
  result.metrics = classifier::evaluate(result.model.ridge, held_out);
  result.train_accuracy = classifier::evaluate(result.model.ridge, design).accuracy;

  result.train_size = train.size();
  result.test_size = test.size();
  result.classifier_dim = design.dim();
  result.training_macs =
      classifier::training_macs(train.size(), result.classifier_dim, data.class_count());
  result.trainable_params = classifier::trainable_params(result.classifier_dim, data.class_count());
  result.model.metadata["test_accuracy"] = result.metrics.accuracy;
  result.model.metadata["train_size"] = result.train_size;
  return result;
}

TrainingResult run_training(const ExperimentConfig& config) {
  config::validate(config, config.burst_length());
  const auto data = load_data(config);
  return run_training(config, data);
}

json metrics_json(const TrainingResult& r, const ExperimentConfig& config) {
  json confusion = json::array();
  for (Eigen::Index i = 0; i < r.metrics.confusion.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < r.metrics.confusion.cols(); ++j) row.push_back(r.metrics.confusion(i, j));
    confusion.push_back(std::move(row));
  }
  return {{"name", config.name},
          {"model", config::to_string(config.model)},
          {"accuracy", r.metrics.accuracy},
          {"train_accuracy", r.train_accuracy},
          {"per_class_accuracy", r.metrics.per_class_accuracy},
          {"confusion", std::move(confusion)},
          {"class_names", r.model.ridge.label_map},
          {"class_count", r.model.ridge.class_count()},
          {"train_size", r.train_size},
          {"test_size", r.test_size},
          {"classifier_dim", r.classifier_dim},
          {"training_macs", r.training_macs},
          {"trainable_params", r.trainable_params},
          {"lambda", r.model.ridge.lambda},
          {"timing", {{"train_seconds", r.train_seconds}}}};
}

InferenceResult run_inference(const artifact::ModelArtifact& model, std::span<const IQBurst> bursts,
                              std::span<const std::size_t> labels, std::size_t threads) {
  std::vector<std::size_t> all(bursts.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto rows = feature_matrix(model, bursts, all, threads);
  InferenceResult out;
  if (!bursts.empty()) out.predictions = classifier::predict_batch(model.ridge, rows);
  if (!labels.empty()) {
    if (labels.size() != bursts.size()) throw DataError("label count does not match bursts");
    std::vector<std::size_t> predicted;
    for (const auto& p : out.predictions) predicted.push_back(p.label);
    out.metrics = classifier::score(labels, predicted, model.ridge.class_count());
  }
  return out;
}

InferenceResult run_inference(const std::filesystem::path& model_path,
                              const std::filesystem::path& iq_path, std::size_t threads) {
  const auto model = artifact::load_model(model_path);
  const auto file = iq_io::load_iq_file(iq_path);
  std::vector<std::size_t> labels;
  // Labels are only comparable when the file's class names match the model.
  if (!file.meta.labels.empty() && file.meta.class_names == model.ridge.label_map)
    labels = file.meta.labels;
  return run_inference(model, file.bursts, labels, threads);
}

const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols = {
      "transform", "n_nodes",       "k",              "decimation",    "noise_std",
      "lambda",    "seed",          "model",          "accuracy",      "train_seconds",
      "classifier_dim", "training_macs", "trainable_params"};
  return cols;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  const auto& cols = sweep_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  const auto old_precision = out.precision(10);
  for (const auto& r : rows) {
    out << r.transform << ',' << r.n_nodes << ',' << r.k << ',' << r.decimation << ','
        << r.noise_std << ',' << r.lambda << ',' << r.seed << ',' << r.model << ','
        << r.accuracy << ',' << r.train_seconds << ',' << r.classifier_dim << ','
        << r.training_macs << ',' << r.trainable_params << '\n';
  }
  out.precision(old_precision);
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config, const synthrf::Dataset& data,
                                const SweepCallback& on_row) {
  const std::size_t length = common_burst_length(data);
  const auto points = config::expand_sweep(config, length);
  std::vector<ModelKind> models{config.model};
  std::vector<double> lambdas{config.lambda};
  if (config.sweep && !config.sweep->models.empty()) models = config.sweep->models;
  if (config.sweep && !config.sweep->lambda.empty()) lambdas = config.sweep->lambda;

  std::vector<std::size_t> train_labels, test_labels;
  for (auto i : data.train_indices) train_labels.push_back(data.labels[i]);
  for (auto i : data.test_indices) test_labels.push_back(data.labels[i]);

  std::vector<SweepRow> rows;
  for (const auto& point : points) {
    for (auto m : models) {
      ExperimentConfig cfg = point.config;
      cfg.model = m;
      const auto t0 = Clock::now();
      const auto model = prepare_model(cfg, data, data.train_indices, cfg.threads);
      classifier::DesignMatrix design{
          feature_matrix(model, data.bursts, data.train_indices, cfg.threads), train_labels,
          data.class_count()};
      const double feature_seconds = seconds_since(t0);
      const classifier::DesignMatrix held_out{
          feature_matrix(model, data.bursts, data.test_indices, cfg.threads), test_labels,
          data.class_count()};
      for (double lambda : lambdas) {
        const auto t1 = Clock::now();
        classifier::RidgeModel ridge;
        try {
          ridge = classifier::train_ridge(design, lambda, data.class_names);
        } catch (const Error& e) {
          rethrow_with_context(e, "ridge stage");
        }
        SweepRow row;
        row.train_seconds = feature_seconds + seconds_since(t1);
        row.accuracy = classifier::evaluate(ridge, held_out).accuracy;
        for (std::size_t t = 0; t < cfg.transforms.size(); ++t) {
          row.transform += (t ? "+" : "");
          row.transform += transforms::to_string(cfg.transforms[t].kind);
          if (cfg.transforms[t].kind == transforms::TransformKind::decimated_dft)
            row.decimation = cfg.transforms[t].decimation;
        }
        row.n_nodes = cfg.topology.loop.n_nodes;
        row.k = cfg.topology.layers ? 0 : cfg.topology.split;
        row.noise_std = cfg.topology.loop.noise_std;
        row.lambda = lambda;
        row.seed = cfg.seed;
        row.model = std::string(config::to_string(m));
        row.classifier_dim = design.dim();
        row.training_macs = classifier::training_macs(design.size(), design.dim(), data.class_count());
        row.trainable_params = classifier::trainable_params(design.dim(), data.class_count());
        if (on_row) on_row(row);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

HyperoptOutcome run_hyperopt(const ExperimentConfig& config, const synthrf::Dataset& data,
                             const hyperopt::TrialCallback& on_trial) {
  if (!config.hyperopt) throw ConfigError("config has no hyperopt section");
  const auto& h = *config.hyperopt;
  const std::size_t length = common_burst_length(data);
  config::validate(config, length);

  std::vector<std::size_t> sub_labels;
  for (auto i : data.train_indices) sub_labels.push_back(data.labels[i]);
  std::vector<std::size_t> fit_local, val_local;
  synthrf::stratified_split(sub_labels, data.class_count(), h.validation_fraction,
                            derive_seed(config.seed, {kValidationStream}), fit_local, val_local);
  std::vector<std::size_t> fit, val;
  for (auto i : fit_local) fit.push_back(data.train_indices[i]);
  for (auto i : val_local) val.push_back(data.train_indices[i]);
  if (val.empty()) throw DataError("validation split is empty");

  hyperopt::SearchSpace space;
  space.params = h.space;
  space.constraints.push_back([&](const hyperopt::ParamPoint& p) {
    try {
      config::validate(config::with_params(config, p, h.space), length);
      return true;
    } catch (const Error&) {
      return false;
    }
  });
  const hyperopt::Objective objective = [&](const hyperopt::ParamPoint& p, std::uint64_t) {
    const auto cfg = config::with_params(config, p, h.space);
    return run_training(cfg, data, std::make_pair(fit, val)).metrics.accuracy;
  };

  HyperoptOutcome out;
  if (h.method == config::HyperoptConfig::Method::grid) {
    hyperopt::GridOptions o;
    o.levels = h.levels;
    o.points_per_axis = h.points_per_axis;
    o.seed = config.seed;
    o.on_trial = on_trial;
    out.search = hyperopt::grid_search(space, objective, o);
  } else {
    hyperopt::BayesOptions o;
    o.budget = h.budget;
    o.initial_design = h.initial_design;
    o.seed = config.seed;
    o.on_trial = on_trial;
    out.search = hyperopt::bayes_opt(space, objective, o);
  }
  if (!out.search.best.ok()) throw DataError("every hyperopt trial failed");
  out.best_config = config::with_params(config, out.search.best.params, h.space);
  out.best_config.hyperopt.reset();
  return out;
}

}  // namespace dlr::pipeline
