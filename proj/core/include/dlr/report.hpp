#pragma once

// Figure-of-merit table: trainable parameters, training MACs and training
// latency of a DLR model next to reference ratios against a larger baseline.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dlr/config.hpp"

namespace dlr::report {

struct FomInputs {
  std::size_t classifier_dim = 0;
  std::size_t class_count = 0;
  std::size_t train_size = 0;
  double train_seconds = 0.0;
  double accuracy = 0.0;
};

/// Reads the fields written by pipeline::metrics_json. Throws DataError.
[[nodiscard]] FomInputs fom_inputs(const nlohmann::json& metrics);

struct FomRow {
  std::string name;
  double dlr = 0.0;
  std::optional<double> baseline;         ///< when configured
  std::optional<double> measured_ratio;   ///< baseline / dlr
  double reference_ratio = 0.0;
  std::string reference_text;             ///< e.g. ">=1200"
};

struct FomTable {
  std::uint64_t trainable_params = 0;
  std::uint64_t training_macs = 0;
  double train_seconds = 0.0;
  double accuracy = 0.0;
  std::vector<FomRow> rows;  ///< params, MACs, latency
};

[[nodiscard]] FomTable report_fom(const FomInputs& inputs, const config::ReportConfig& reference);
[[nodiscard]] std::string format_fom(const FomTable& table);
[[nodiscard]] nlohmann::json to_json(const FomTable& table);

}  // namespace dlr::report
