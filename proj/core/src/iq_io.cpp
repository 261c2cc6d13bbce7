#include "dlr/iq_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "dlr/error.hpp"

namespace dlr::iq_io {
namespace {

static_assert(std::numeric_limits<float>::is_iec559, "float32 I/Q needs IEEE floats");

void put_f32(std::vector<char>& out, float v) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  char bytes[4];
  std::memcpy(bytes, &bits, 4);
  out.insert(out.end(), bytes, bytes + 4);
}

float get_f32(const char* p) {
  std::uint32_t bits;
  std::memcpy(&bits, p, 4);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  return std::bit_cast<float>(bits);
}

std::vector<std::size_t> index_list(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("sidecar field '") + key + "': " + e.what());
  }
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".json";
  return p;
}

void save_iq_file(const std::filesystem::path& path, std::span<const IQBurst> bursts,
                  const IqFileMeta& meta) {
  if (!meta.labels.empty() && meta.labels.size() != bursts.size())
    throw InvalidArgument("label count does not match burst count");
  std::vector<char> bytes;
  bytes.reserve(bursts.size() * meta.burst_length * 8);
  for (std::size_t i = 0; i < bursts.size(); ++i) {
    if (bursts[i].size() != meta.burst_length)
      throw InvalidArgument("burst " + std::to_string(i) + " has " +
                            std::to_string(bursts[i].size()) + " samples, expected " +
                            std::to_string(meta.burst_length));
    for (const auto& z : bursts[i].samples) {
      put_f32(bytes, static_cast<float>(z.real()));
      put_f32(bytes, static_cast<float>(z.imag()));
    }
  }
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for " + path.string());
  }
  nlohmann::json side = {{"format", "cf32_le"},
                         {"sample_rate", meta.sample_rate},
                         {"center_frequency", meta.center_frequency},
                         {"burst_length", meta.burst_length},
                         {"burst_count", bursts.size()},
                         {"labels", meta.labels},
                         {"class_names", meta.class_names}};
  if (meta.train_indices) side["train_indices"] = *meta.train_indices;
  if (meta.test_indices) side["test_indices"] = *meta.test_indices;
  if (!meta.generator.is_null()) side["generator"] = meta.generator;
  std::ofstream out(sidecar_path(path), std::ios::trunc);
  if (!out) throw DataError("cannot write " + sidecar_path(path).string());
  out << side.dump(1) << '\n';
}

IqFile load_iq_file(const std::filesystem::path& path) {
  const auto side_path = sidecar_path(path);
  std::ifstream side_in(side_path);
  if (!side_in) throw DataError("missing sidecar " + side_path.string());
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(side_in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed sidecar " + side_path.string() + ": " + e.what());
  }

  IqFile file;
  auto& meta = file.meta;
  try {
    meta.sample_rate = side.at("sample_rate").get<double>();
    meta.center_frequency = side.value("center_frequency", 0.0);
    meta.burst_length = side.at("burst_length").get<std::size_t>();
    meta.labels = side.value("labels", std::vector<std::size_t>{});
    meta.class_names = side.value("class_names", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw DataError("sidecar " + side_path.string() + ": " + e.what());
  }
  if (side.contains("train_indices")) meta.train_indices = index_list(side, "train_indices");
  if (side.contains("test_indices")) meta.test_indices = index_list(side, "test_indices");
  if (side.contains("generator")) meta.generator = side["generator"];
  if (meta.burst_length == 0) throw DataError("burst_length must be > 0");

  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  if (bytes.size() % 8 != 0)
    throw DataError(path.string() + ": truncated I/Q pair (" + std::to_string(bytes.size()) +
                    " bytes)");
  const std::size_t samples = bytes.size() / 8;
  if (samples % meta.burst_length != 0)
    throw DataError(path.string() + ": " + std::to_string(samples) +
                    " samples is not a multiple of burst length " +
                    std::to_string(meta.burst_length));
  const std::size_t count = samples / meta.burst_length;
  if (!meta.labels.empty() && meta.labels.size() != count)
    throw DataError(path.string() + ": " + std::to_string(meta.labels.size()) +
                    " labels for " + std::to_string(count) + " bursts");
  for (auto label : meta.labels)
    if (!meta.class_names.empty() && label >= meta.class_names.size())
      throw DataError("label " + std::to_string(label) + " has no class name");

  file.bursts.resize(count);
  const char* p = bytes.data();
  for (std::size_t b = 0; b < count; ++b) {
    auto& burst = file.bursts[b];
    burst.sample_rate = meta.sample_rate;
    burst.meta.center_frequency = meta.center_frequency;
    if (!meta.labels.empty()) {
      burst.meta.label = meta.class_names.empty() ? std::to_string(meta.labels[b])
                                                  : meta.class_names[meta.labels[b]];
    }
    burst.samples.resize(meta.burst_length);
    for (auto& z : burst.samples) {
      z = Complex(get_f32(p), get_f32(p + 4));
      p += 8;
    }
  }
  return file;
}

void save_dataset(const std::filesystem::path& path, const synthrf::Dataset& dataset) {
  if (dataset.bursts.empty()) throw InvalidArgument("dataset is empty");
  IqFileMeta meta;
  meta.sample_rate = dataset.bursts.front().sample_rate;
  meta.burst_length = dataset.bursts.front().size();
  meta.labels = dataset.labels;
  meta.class_names = dataset.class_names;
  meta.train_indices = dataset.train_indices;
  meta.test_indices = dataset.test_indices;
  meta.generator = dataset.generator;
  save_iq_file(path, dataset.bursts, meta);
}

synthrf::Dataset load_dataset(const std::filesystem::path& path) {
  auto file = load_iq_file(path);
  if (file.meta.labels.empty()) throw DataError(path.string() + ": sidecar has no labels");
  synthrf::Dataset ds;
  ds.bursts = std::move(file.bursts);
  ds.labels = std::move(file.meta.labels);
  ds.class_names = std::move(file.meta.class_names);
  if (ds.class_names.empty()) {
    std::size_t classes = 0;
    for (auto l : ds.labels) classes = std::max(classes, l + 1);
    for (std::size_t c = 0; c < classes; ++c) ds.class_names.push_back(std::to_string(c));
  }
  ds.generator = std::move(file.meta.generator);
  if (file.meta.train_indices && file.meta.test_indices) {
    ds.train_indices = std::move(*file.meta.train_indices);
    ds.test_indices = std::move(*file.meta.test_indices);
    for (auto i : ds.train_indices)
      if (i >= ds.size()) throw DataError("train index out of range");
    for (auto i : ds.test_indices)
      if (i >= ds.size()) throw DataError("test index out of range");
  } else {
    synthrf::stratified_split(ds.labels, ds.class_count(), 0.2, 0, ds.train_indices,
                              ds.test_indices);
  }
  return ds;
}

}  // namespace dlr::iq_io
