// dlr: command-line front end for the experiment pipeline.
//
// Exit status: 0 success, 2 configuration or argument error, 3 data or
// model-file error, 4 numeric error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dlr/artifact.hpp"
#include "dlr/config.hpp"
#include "dlr/error.hpp"
#include "dlr/iq_io.hpp"
#include "dlr/pipeline.hpp"
#include "dlr/report.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> threads;
  std::string model_path;
  std::string input_path;
  std::string metrics_path;
};

int exit_code(dlr::ErrorCode code) {
  switch (code) {
    case dlr::ErrorCode::config:
    case dlr::ErrorCode::invalid_argument:
      return 2;
    case dlr::ErrorCode::data:
    case dlr::ErrorCode::format:
      return 3;
    case dlr::ErrorCode::numeric_overflow:
    case dlr::ErrorCode::singular_matrix:
      return 4;
  }
  return 1;
}

dlr::config::ExperimentConfig load(const Options& o) {
  if (o.config_path.empty()) throw dlr::ConfigError("--config is required");
  auto c = dlr::config::load_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = *o.threads;
  return c;
}

fs::path output_path(const Options& o, const dlr::config::ExperimentConfig& c,
                     const std::string& suffix) {
  fs::path p = o.out.empty() ? fs::path(c.output_dir) / (c.name + suffix) : fs::path(o.out);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw dlr::DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

int cmd_generate(const Options& o) {
  auto c = load(o);
  if (o.seed) {
    c.data.wiprec.seed = *o.seed;
    c.data.sei.seed = *o.seed;
  }
  if (c.data.source == dlr::config::DataSource::file)
    throw dlr::ConfigError("generate needs a synthetic data source");
  const auto data = dlr::pipeline::load_data(c);
  const auto path = output_path(o, c, ".iq");
  dlr::iq_io::save_dataset(path, data);
  std::printf("wrote %zu bursts (%zu classes) to %s\n", data.size(), data.class_count(),
              path.string().c_str());
  return 0;
}

int cmd_train(const Options& o) {
  const auto c = load(o);
  dlr::config::validate(c, c.burst_length());
  const auto data = dlr::pipeline::load_data(c);
  const auto result = dlr::pipeline::run_training(c, data);
  const auto model_path = output_path(o, c, ".dlrm");
  dlr::artifact::save_model(model_path, result.model);
  const fs::path metrics_path =
      o.metrics_path.empty() ? fs::path(model_path).replace_extension(".metrics.json")
                             : fs::path(o.metrics_path);
  write_json(metrics_path, dlr::pipeline::metrics_json(result, c));
  std::printf("accuracy %.4f (train %.4f) dim %zu params %llu train_seconds %.3f\n",
              result.metrics.accuracy, result.train_accuracy, result.classifier_dim,
              static_cast<unsigned long long>(result.trainable_params), result.train_seconds);
  std::printf("model %s\nmetrics %s\n", model_path.string().c_str(),
              metrics_path.string().c_str());
  return 0;
}

int cmd_infer(const Options& o) {
  if (o.model_path.empty() || o.input_path.empty())
    throw dlr::ConfigError("infer needs --model and --input");
  const auto t0 = std::chrono::steady_clock::now();
  const auto model = dlr::artifact::load_model(o.model_path);
  const auto file = dlr::iq_io::load_iq_file(o.input_path);
  std::vector<std::size_t> labels;
  if (!file.meta.labels.empty() && file.meta.class_names == model.ridge.label_map)
    labels = file.meta.labels;
  const auto result = dlr::pipeline::run_inference(model, file.bursts, labels, o.threads.value_or(1));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::ostream* out = &std::cout;
  std::ofstream file_out;
  if (!o.out.empty()) {
    file_out.open(o.out, std::ios::trunc);
    if (!file_out) throw dlr::DataError("cannot write " + o.out);
    out = &file_out;
  }
  *out << "index,label";
  for (const auto& name : model.ridge.label_map) *out << ",score_" << name;
  *out << '\n';
  out->precision(17);
  for (std::size_t i = 0; i < result.predictions.size(); ++i) {
    const auto& p = result.predictions[i];
    *out << i << ',' << model.ridge.label_map[p.label];
    for (Eigen::Index c = 0; c < p.scores.size(); ++c) *out << ',' << p.scores[c];
    *out << '\n';
  }
  if (result.metrics)
    std::fprintf(stderr, "accuracy %.4f over %zu bursts\n", result.metrics->accuracy,
                 result.metrics->total);
  std::fprintf(stderr, "%zu bursts in %.3f s\n", result.predictions.size(), seconds);
  return 0;
}

int cmd_sweep(const Options& o) {
  const auto c = load(o);
  (void)dlr::config::expand_sweep(c, c.burst_length());  // validate every point up front
  const auto data = dlr::pipeline::load_data(c);
  const auto path = output_path(o, c, ".sweep.csv");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw dlr::DataError("cannot write " + path.string());
  std::vector<dlr::pipeline::SweepRow> none;
  dlr::pipeline::write_sweep_csv(out, none);
  const auto rows = dlr::pipeline::run_sweep(c, data, [&](const dlr::pipeline::SweepRow& r) {
    const dlr::pipeline::SweepRow one[] = {r};
    std::ostringstream line;
    dlr::pipeline::write_sweep_csv(line, one);
    const auto text = line.str();
    const auto body = text.substr(text.find('\n') + 1);
    out << body << std::flush;
    std::cout << body << std::flush;
  });
  std::printf("%zu rows written to %s\n", rows.size(), path.string().c_str());
  return 0;
}

int cmd_hyperopt(const Options& o) {
  const auto c = load(o);
  dlr::config::validate(c, c.burst_length());
  const auto data = dlr::pipeline::load_data(c);
  const fs::path dir = o.out.empty() ? fs::path(c.output_dir) / (c.name + ".hyperopt") : fs::path(o.out);
  fs::create_directories(dir);
  std::ofstream log(dir / "trials.jsonl", std::ios::trunc);
  if (!log) throw dlr::DataError("cannot write " + (dir / "trials.jsonl").string());
  const auto outcome = dlr::pipeline::run_hyperopt(c, data, [&](const dlr::hyperopt::TrialRecord& t) {
    log << dlr::hyperopt::to_json(t).dump() << '\n' << std::flush;
    std::printf("trial %zu %s\n", t.index,
                t.ok() ? std::to_string(*t.accuracy).c_str() : ("failed: " + t.error).c_str());
  });
  for (const auto& note : outcome.search.notes) std::printf("note: %s\n", note.c_str());
  write_json(dir / "best_config.json", dlr::config::to_json(outcome.best_config));
  std::printf("best validation accuracy %.4f (trial %zu); config %s\n",
              outcome.search.best.accuracy.value_or(0.0), outcome.search.best.index,
              (dir / "best_config.json").string().c_str());
  return 0;
}

int cmd_report(const Options& o) {
  dlr::config::ReportConfig reference;
  nlohmann::json metrics;
  if (!o.metrics_path.empty()) {
    if (!o.config_path.empty()) reference = load(o).report;
    std::ifstream in(o.metrics_path);
    if (!in) throw dlr::DataError("cannot open " + o.metrics_path);
    try {
      metrics = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw dlr::DataError("metrics file is not valid JSON: " + std::string(e.what()));
    }
  } else {
    const auto c = load(o);
    reference = c.report;
    dlr::config::validate(c, c.burst_length());
    const auto data = dlr::pipeline::load_data(c);
    metrics = dlr::pipeline::metrics_json(dlr::pipeline::run_training(c, data), c);
  }
  const auto table = dlr::report::report_fom(dlr::report::fom_inputs(metrics), reference);
  std::fputs(dlr::report::format_fom(table).c_str(), stdout);
  if (!o.out.empty()) write_json(o.out, dlr::report::to_json(table));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay-loop reservoir experiments on I/Q bursts"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", o.config_path, "experiment config (JSON)");
    if (needs_config) opt->required();
    sub->add_option("--seed", o.seed, "override the config seed");
    sub->add_option("--out", o.out, "output path");
    sub->add_option("--threads", o.threads, "worker threads");
  };

  auto* gen = app.add_subcommand("generate", "write a synthetic dataset as an I/Q file");
  add_common(gen, true);
  auto* train = app.add_subcommand("train", "train a model and write it with its metrics");
  add_common(train, true);
  train->add_option("--metrics", o.metrics_path, "metrics JSON path");
  auto* infer = app.add_subcommand("infer", "classify the bursts of an I/Q file");
  add_common(infer, false);
  infer->add_option("--model", o.model_path, "model file")->required();
  infer->add_option("--input", o.input_path, "I/Q file")->required();
  auto* sweep = app.add_subcommand("sweep", "run the config's sweep axes into a CSV table");
  add_common(sweep, true);
  auto* hyper = app.add_subcommand("hyperopt", "tune hyperparameters on a validation split");
  add_common(hyper, true);
  auto* report = app.add_subcommand("report", "figure-of-merit table");
  add_common(report, false);
  report->add_option("--metrics", o.metrics_path, "metrics JSON from train");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_generate(o);
    if (*train) return cmd_train(o);
    if (*infer) return cmd_infer(o);
    if (*sweep) return cmd_sweep(o);
    if (*hyper) return cmd_hyperopt(o);
    if (*report) return cmd_report(o);
  } catch (const dlr::Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", dlr::to_string(e.code()), e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
