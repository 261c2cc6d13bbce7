#pragma once

// Raw I/Q files: little-endian float32 interleaved I,Q with a JSON sidecar
// at "<path>.json" holding sample_rate, center_frequency, burst_length and
// per-burst labels.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dlr/iq.hpp"
#include "dlr/synthrf.hpp"

namespace dlr::iq_io {

struct IqFileMeta {
  double sample_rate = 100e6;
  double center_frequency = 0.0;
  std::size_t burst_length = 1024;
  std::vector<std::size_t> labels;        ///< one per burst, may be empty
  std::vector<std::string> class_names;   ///< label index -> name
  std::optional<std::vector<std::size_t>> train_indices;
  std::optional<std::vector<std::size_t>> test_indices;
  nlohmann::json generator;  ///< null when the data did not come from synthrf
};

struct IqFile {
  std::vector<IQBurst> bursts;
  IqFileMeta meta;
};

[[nodiscard]] std::filesystem::path sidecar_path(const std::filesystem::path& path);

/// Writes samples (narrowed to float32) and the sidecar. All bursts must
/// have meta.burst_length samples.
void save_iq_file(const std::filesystem::path& path, std::span<const IQBurst> bursts,
                  const IqFileMeta& meta);

/// Throws DataError for a missing file or sidecar, a truncated I/Q pair, a
/// sample count that is not a multiple of the burst length, or a label list
/// that does not match the burst count.
[[nodiscard]] IqFile load_iq_file(const std::filesystem::path& path);

void save_dataset(const std::filesystem::path& path, const synthrf::Dataset& dataset);

/// Loads a file written by save_dataset (or any labeled file). Without a
/// stored split a stratified 80/20 split with seed 0 is made.
[[nodiscard]] synthrf::Dataset load_dataset(const std::filesystem::path& path);

}  // namespace dlr::iq_io
