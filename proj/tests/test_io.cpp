#include <filesystem>
#include <fstream>
#include <vector>

#include <gtest/gtest.h>

#include "dlr/artifact.hpp"
#include "dlr/error.hpp"
#include "dlr/iq_io.hpp"
#include "dlr/pipeline.hpp"
#include "dlr/random.hpp"

namespace {

namespace fs = std::filesystem;
using namespace dlr;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "dlr_test_io";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

config::ExperimentConfig small_config(const std::string& transform = "fft_mag") {
  return config::parse_config(nlohmann::json::parse(R"({
    "name": "io", "seed": 3,
    "data": {"source": "wiprec", "bursts_per_class": 10, "seed": 2},
    "transforms": [{"kind": ")" + transform + R"("}],
    "topology": {"split": 2, "loop": {"n_nodes": 12, "loop_gain": 0.5, "filter_taps": [0.5, 0.5]}},
    "input_gain_mode": "normalized"
  })"));
}

TEST(IqFile, RoundTripNarrowsToFloat) {
  Rng rng(1);
  std::vector<IQBurst> bursts(3);
  for (auto& b : bursts)
    for (int i = 0; i < 16; ++i) b.samples.emplace_back(rng.normal(), rng.normal());
  iq_io::IqFileMeta meta;
  meta.burst_length = 16;
  meta.labels = {0, 1, 0};
  meta.class_names = {"a", "b"};
  const auto path = scratch("rt.iq");
  iq_io::save_iq_file(path, bursts, meta);
  EXPECT_EQ(fs::file_size(path), 3u * 16u * 8u);
  const auto back = iq_io::load_iq_file(path);
  ASSERT_EQ(back.bursts.size(), 3u);
  EXPECT_EQ(back.meta.labels, meta.labels);
  EXPECT_EQ(back.meta.class_names, meta.class_names);
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t i = 0; i < 16; ++i) {
      EXPECT_EQ(back.bursts[b].samples[i].real(), static_cast<float>(bursts[b].samples[i].real()));
      EXPECT_EQ(back.bursts[b].samples[i].imag(), static_cast<float>(bursts[b].samples[i].imag()));
    }
}

TEST(IqFile, DatasetRoundTripKeepsSplit) {
  synthrf::WiprecOptions w;
  w.bursts_per_class = 5;
  const auto d = synthrf::make_wiprec_dataset(w);
  const auto path = scratch("ds.iq");
  iq_io::save_dataset(path, d);
  const auto back = iq_io::load_dataset(path);
  EXPECT_EQ(back.labels, d.labels);
  EXPECT_EQ(back.train_indices, d.train_indices);
  EXPECT_EQ(back.test_indices, d.test_indices);
  EXPECT_EQ(back.class_names, d.class_names);
  // Synthetic bursts are already float32, so the round trip is exact.
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(back.bursts[i].samples, d.bursts[i].samples);
}

TEST(IqFile, Errors) {
  const auto path = scratch("bad.iq");
  iq_io::IqFileMeta meta;
  meta.burst_length = 4;
  std::vector<IQBurst> one(1);
  one[0].samples.assign(4, Complex{1, 0});
  iq_io::save_iq_file(path, one, meta);

  auto bytes = read_bytes(path);
  bytes.pop_back();
  write_bytes(path, bytes);
  EXPECT_THROW((void)iq_io::load_iq_file(path), DataError);  // truncated pair

  bytes.resize(3 * 8);
  write_bytes(path, bytes);
  EXPECT_THROW((void)iq_io::load_iq_file(path), DataError);  // not a whole burst

  iq_io::save_iq_file(path, one, meta);
  fs::remove(iq_io::sidecar_path(path));
  EXPECT_THROW((void)iq_io::load_iq_file(path), DataError);
  EXPECT_THROW((void)iq_io::load_iq_file(scratch("missing.iq")), DataError);

  meta.labels = {0, 1};
  meta.class_names = {"a", "b"};
  EXPECT_THROW(iq_io::save_iq_file(path, one, meta), Error);
}

class ArtifactTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto c = small_config("diff_fft");
    result_ = new pipeline::TrainingResult(pipeline::run_training(c));
  }
  static void TearDownTestSuite() {
    delete result_;
    result_ = nullptr;
  }
  static pipeline::TrainingResult* result_;
};
pipeline::TrainingResult* ArtifactTest::result_ = nullptr;

TEST_F(ArtifactTest, SerializeRoundTrip) {
  const auto& m = result_->model;
  ASSERT_TRUE(m.profile.has_value());
  const auto bytes = artifact::serialize(m);
  EXPECT_EQ(artifact::deserialize(bytes), m);
  EXPECT_EQ(artifact::serialize(artifact::deserialize(bytes)), bytes);
  const auto path = scratch("m.dlrm");
  artifact::save_model(path, m);
  EXPECT_EQ(artifact::load_model(path), m);
}

TEST_F(ArtifactTest, AnyCorruptionIsAFormatError) {
  const auto bytes = artifact::serialize(result_->model);
  Rng rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    auto bad = bytes;
    const auto pos = rng.below(bad.size());
    bad[pos] ^= static_cast<std::uint8_t>(1u << rng.below(8));
    EXPECT_THROW((void)artifact::deserialize(bad), FormatError) << "byte " << pos;
  }
  for (std::size_t cut : {0u, 3u, 12u, 30u}) {
    const std::vector<std::uint8_t> head(bytes.begin(), bytes.begin() + static_cast<long>(cut));
    EXPECT_THROW((void)artifact::deserialize(head), FormatError);
  }
  auto longer = bytes;
  longer.push_back(0);
  EXPECT_THROW((void)artifact::deserialize(longer), FormatError);
  auto version = bytes;
  version[4] = 99;
  EXPECT_THROW((void)artifact::deserialize(version), FormatError);
  EXPECT_THROW((void)artifact::load_model(scratch("nothing.dlrm")), Error);
}

TEST_F(ArtifactTest, ReloadedModelPredictsIdentically) {
  const auto data = pipeline::load_data(small_config("diff_fft"));
  const auto reloaded = artifact::deserialize(artifact::serialize(result_->model));
  const auto a = pipeline::run_inference(result_->model, data.bursts);
  const auto b = pipeline::run_inference(reloaded, data.bursts);
  ASSERT_EQ(a.predictions.size(), b.predictions.size());
  for (std::size_t i = 0; i < a.predictions.size(); ++i) {
    EXPECT_EQ(a.predictions[i].label, b.predictions[i].label);
    EXPECT_EQ(a.predictions[i].scores, b.predictions[i].scores);
  }
}

}  // namespace
