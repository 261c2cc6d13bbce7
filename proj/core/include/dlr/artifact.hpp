#pragma once

// Self-contained trained model: transforms, topology with explicit masks,
// readout weights and label map.
//
// Container layout (all integers little-endian):
//   "DLRM" | u32 version | u32 0x01020304 | u64 header bytes | header JSON
//   | f64 payload (masks in topology order, amplitude profile, weights
//   row-major N x C) | u64 FNV-1a of everything before it

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "dlr/classifier.hpp"
#include "dlr/config.hpp"
#include "dlr/topology.hpp"
#include "dlr/transforms.hpp"

namespace dlr::artifact {

inline constexpr std::uint32_t kFormatVersion = 1;

struct ModelArtifact {
  config::ModelKind model = config::ModelKind::dlr;
  std::size_t burst_length = 1024;
  std::vector<transforms::TransformSpec> transforms;
  std::optional<transforms::MeanAmplitudeProfile> profile;  ///< diff_fft only
  /// DLR: topology whose loops hold the effective input gains.
  std::optional<topology::TopologySpec> topology;
  std::vector<std::vector<reservoir::Mask>> masks;
  std::uint64_t noise_seed = 0;
  /// raw_rr: transform output average-pooled to this many values.
  std::size_t pool_size = 0;
  classifier::RidgeModel ridge;
  nlohmann::json metadata = nlohmann::json::object();

  friend bool operator==(const ModelArtifact& a, const ModelArtifact& b);
};

[[nodiscard]] std::vector<std::uint8_t> serialize(const ModelArtifact& model);
/// Throws FormatError on bad magic, unsupported version, size mismatch or
/// checksum failure.
[[nodiscard]] ModelArtifact deserialize(std::span<const std::uint8_t> bytes);

void save_model(const std::filesystem::path& path, const ModelArtifact& model);
[[nodiscard]] ModelArtifact load_model(const std::filesystem::path& path);

}  // namespace dlr::artifact
