#include "dlr/report.hpp"

#include <cstdio>

#include "dlr/classifier.hpp"
#include "dlr/error.hpp"

namespace dlr::report {

FomInputs fom_inputs(const nlohmann::json& m) {
  FomInputs in;
  try {
    in.classifier_dim = m.at("classifier_dim").get<std::size_t>();
    in.class_count = m.at("class_count").get<std::size_t>();
    in.train_size = m.at("train_size").get<std::size_t>();
    in.accuracy = m.at("accuracy").get<double>();
    in.train_seconds = m.at("timing").at("train_seconds").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("metrics file is missing a field: ") + e.what());
  }
  return in;
}

FomTable report_fom(const FomInputs& in, const config::ReportConfig& ref) {
  FomTable t;
  t.trainable_params = classifier::trainable_params(in.classifier_dim, in.class_count);
  t.training_macs = classifier::training_macs(in.train_size, in.classifier_dim, in.class_count);
  t.train_seconds = in.train_seconds;
  t.accuracy = in.accuracy;
  auto row = [](std::string name, double dlr, std::optional<double> baseline, double ratio,
                std::string text) {
    FomRow r{std::move(name), dlr, baseline, std::nullopt, ratio, std::move(text)};
    if (baseline && dlr > 0.0) r.measured_ratio = *baseline / dlr;
    return r;
  };
  auto ratio_text = [](double v, bool at_least) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%g", at_least ? ">=" : "", v);
    return std::string(buf);
  };
  t.rows.push_back(row("trainable_params", static_cast<double>(t.trainable_params),
                       ref.baseline_params, ref.params_ratio, ratio_text(ref.params_ratio, false)));
  t.rows.push_back(row("training_macs", static_cast<double>(t.training_macs), ref.baseline_macs,
                       ref.macs_ratio, ratio_text(ref.macs_ratio, false)));
  t.rows.push_back(row("training_latency_s", t.train_seconds, ref.baseline_latency_seconds,
                       ref.latency_ratio, ratio_text(ref.latency_ratio, true)));
  return t;
}

std::string format_fom(const FomTable& t) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-20s %16s %16s %14s %16s\n", "metric", "dlr", "baseline",
                "ratio", "reference_ratio");
  out += line;
  for (const auto& r : t.rows) {
    char base[32] = "-", ratio[32] = "-";
    if (r.baseline) std::snprintf(base, sizeof base, "%.6g", *r.baseline);
    if (r.measured_ratio) std::snprintf(ratio, sizeof ratio, "%.4g", *r.measured_ratio);
    std::snprintf(line, sizeof line, "%-20s %16.6g %16s %14s %16s\n", r.name.c_str(), r.dlr, base,
                  ratio, r.reference_text.c_str());
    out += line;
  }
  std::snprintf(line, sizeof line, "accuracy %.4f\n", t.accuracy);
  out += line;
  return out;
}

nlohmann::json to_json(const FomTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    nlohmann::json j = {{"name", r.name},
                        {"dlr", r.dlr},
                        {"reference_ratio", r.reference_ratio},
                        {"reference_text", r.reference_text}};
    if (r.baseline) j["baseline"] = *r.baseline;
    if (r.measured_ratio) j["measured_ratio"] = *r.measured_ratio;
    rows.push_back(std::move(j));
  }
  return {{"trainable_params", t.trainable_params},
          {"training_macs", t.training_macs},
          {"train_seconds", t.train_seconds},
          {"accuracy", t.accuracy},
          {"rows", std::move(rows)}};
}

}  // namespace dlr::report
