#include "dlr/artifact.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "dlr/error.hpp"
#include "dlr/random.hpp"

namespace dlr::artifact {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'D', 'L', 'R', 'M'};
constexpr std::uint32_t kEndianMarker = 0x01020304;

template <class T>
void put(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <class T>
  T get(const char* what) {
    if (bytes_.size() - pos_ < sizeof(T))
      throw FormatError(std::string("model file truncated while reading ") + what);
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n)
      throw FormatError(std::string("model file truncated while reading ") + what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t position() const noexcept { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

json header_of(const ModelArtifact& m) {
  json h;
  h["model"] = config::to_string(m.model);
  h["burst_length"] = m.burst_length;
  h["transforms"] = json::array();
  for (const auto& t : m.transforms) h["transforms"].push_back(config::to_json(t));
  h["profile_length"] = m.profile ? m.profile->values.size() : 0;
  h["has_profile"] = m.profile.has_value();
  if (m.topology) h["topology"] = config::to_json(*m.topology);
  h["noise_seed"] = m.noise_seed;
  h["pool_size"] = m.pool_size;
  json masks = json::array();
  for (const auto& layer : m.masks) {
    json l = json::array();
    for (const auto& mask : layer)
      l.push_back({{"size", mask.size()},
                   {"seed", mask.seed},
                   {"distribution", reservoir::to_string(mask.distribution)}});
    masks.push_back(std::move(l));
  }
  h["masks"] = std::move(masks);
  h["weights_rows"] = m.ridge.weights.rows();
  h["weights_cols"] = m.ridge.weights.cols();
  h["lambda"] = m.ridge.lambda;
  h["label_map"] = m.ridge.label_map;
  h["metadata"] = m.metadata;
  return h;
}

}  // namespace

bool operator==(const ModelArtifact& a, const ModelArtifact& b) {
  return a.model == b.model && a.burst_length == b.burst_length &&
         a.transforms == b.transforms && a.profile == b.profile && a.topology == b.topology &&
         a.masks == b.masks && a.noise_seed == b.noise_seed && a.pool_size == b.pool_size &&
         a.ridge.weights.rows() == b.ridge.weights.rows() &&
         a.ridge.weights.cols() == b.ridge.weights.cols() &&
         a.ridge.weights == b.ridge.weights && a.ridge.lambda == b.ridge.lambda &&
         a.ridge.label_map == b.ridge.label_map && a.metadata == b.metadata;
}

std::vector<std::uint8_t> serialize(const ModelArtifact& m) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put(out, kFormatVersion);
  put(out, kEndianMarker);
  const std::string header = header_of(m).dump();
  put(out, static_cast<std::uint64_t>(header.size()));
  out.insert(out.end(), header.begin(), header.end());
  for (const auto& layer : m.masks)
    for (const auto& mask : layer)
      for (double v : mask.values) put(out, v);
  if (m.profile)
    for (double v : m.profile->values) put(out, v);
  for (Eigen::Index r = 0; r < m.ridge.weights.rows(); ++r)
    for (Eigen::Index c = 0; c < m.ridge.weights.cols(); ++c) put(out, m.ridge.weights(r, c));
  put(out, fnv1a(out.data(), out.size()));
  return out;
}

ModelArtifact deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("not a model file (bad magic)");
  if (bytes.size() < 28) throw FormatError("model file truncated");
  const auto body = bytes.first(bytes.size() - 8);
  Reader tail(bytes.last(8));
  if (tail.get<std::uint64_t>("checksum") != fnv1a(body.data(), body.size()))
    throw FormatError("model file checksum mismatch (corrupted or truncated)");

  Reader in(body);
  (void)in.take(4, "magic");
  const auto version = in.get<std::uint32_t>("version");
  if (version != kFormatVersion)
    throw FormatError("unsupported model format version " + std::to_string(version) +
                      " (expected " + std::to_string(kFormatVersion) + ")");
  if (in.get<std::uint32_t>("endianness marker") != kEndianMarker)
    throw FormatError("bad endianness marker");
  const auto header_size = in.get<std::uint64_t>("header size");
  const auto header_bytes = in.take(static_cast<std::size_t>(header_size), "header");
  json h;
  try {
    h = json::parse(header_bytes.begin(), header_bytes.end());
  } catch (const json::exception& e) {
    throw FormatError(std::string("model header is not valid JSON: ") + e.what());
  }

  ModelArtifact m;
  try {
    m.model = config::parse_model(h.at("model").get<std::string>());
    m.burst_length = h.at("burst_length").get<std::size_t>();
    for (const auto& t : h.at("transforms")) m.transforms.push_back(config::transform_from_json(t));
    if (h.contains("topology")) m.topology = config::topology_from_json(h.at("topology"));
    m.noise_seed = h.at("noise_seed").get<std::uint64_t>();
    m.pool_size = h.at("pool_size").get<std::size_t>();
    for (const auto& layer : h.at("masks")) {
      std::vector<reservoir::Mask> l;
      for (const auto& mj : layer) {
        reservoir::Mask mask;
        mask.seed = mj.at("seed").get<std::uint64_t>();
        mask.distribution =
            reservoir::parse_mask_distribution(mj.at("distribution").get<std::string>());
        mask.values.resize(mj.at("size").get<std::size_t>());
        l.push_back(std::move(mask));
      }
      m.masks.push_back(std::move(l));
    }
    for (auto& layer : m.masks)
      for (auto& mask : layer)
        for (double& v : mask.values) v = in.get<double>("mask values");
    if (h.at("has_profile").get<bool>()) {
      transforms::MeanAmplitudeProfile p;
      p.values.resize(h.at("profile_length").get<std::size_t>());
      for (double& v : p.values) v = in.get<double>("amplitude profile");
      m.profile = std::move(p);
    }
    const auto rows = h.at("weights_rows").get<Eigen::Index>();
    const auto cols = h.at("weights_cols").get<Eigen::Index>();
    m.ridge.weights.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m.ridge.weights(r, c) = in.get<double>("weights");
    m.ridge.lambda = h.at("lambda").get<double>();
    m.ridge.label_map = h.at("label_map").get<std::vector<std::string>>();
    m.metadata = h.at("metadata");
  } catch (const json::exception& e) {
    throw FormatError(std::string("model header is incomplete: ") + e.what());
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(std::string("model header is inconsistent: ") + e.what());
  }
  if (in.position() != body.size()) throw FormatError("model file has trailing bytes");
  if (m.ridge.label_map.size() != static_cast<std::size_t>(m.ridge.weights.cols()))
    throw FormatError("label map does not match the weight matrix");
  return m;
}

void save_model(const std::filesystem::path& path, const ModelArtifact& model) {
  const auto bytes = serialize(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

ModelArtifact load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model " + path.string());
  const std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::uint8_t> bytes(raw.begin(), raw.end());
  return deserialize(bytes);
}

}  // namespace dlr::artifact
