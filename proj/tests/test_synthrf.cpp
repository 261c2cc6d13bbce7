#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "dlr/error.hpp"
#include "dlr/random.hpp"
#include "dlr/synthrf.hpp"
#include "dlr/transforms.hpp"

namespace {

using namespace dlr;
using namespace dlr::synthrf;

constexpr ProtocolFamily kFamilies[] = {ProtocolFamily::wifi_like, ProtocolFamily::bt_like,
                                        ProtocolFamily::zigbee_like, ProtocolFamily::nrf_like};

double power(std::span<const Complex> x) {
  double p = 0.0;
  for (auto z : x) p += std::norm(z);
  return p / static_cast<double>(x.size());
}

double correlation(std::span<const Complex> a, std::span<const Complex> b) {
  Complex dot{};
  double na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * std::conj(b[i]);
    na += std::norm(a[i]);
    nb += std::norm(b[i]);
  }
  return std::abs(dot) / std::sqrt(na * nb);
}

TEST(Waveforms, UnitPowerAndDeterministic) {
  for (auto f : kFamilies) {
    const auto spec = protocol_spec(f);
    const auto a = gen_protocol_burst(spec, 5);
    EXPECT_EQ(a.size(), kBurstLength);
    EXPECT_NEAR(power(a.samples), 1.0, 1e-9) << to_string(f);
    EXPECT_EQ(a.samples, gen_protocol_burst(spec, 5).samples);
    // The head of a burst is preamble; payload seeds differ further in.
    EXPECT_NE(gen_protocol_burst(spec, 5, 16384).samples, gen_protocol_burst(spec, 6, 16384).samples);
    EXPECT_EQ(parse_family(to_string(f)), f);
  }
}

// Nominal widths are starting guesses for bandwidth normalization, which
// then measures and corrects; they track the seed-averaged width at 1024
// samples.
TEST(Waveforms, NominalBandwidthTracksMeasurement) {
  std::map<ProtocolFamily, double> measured;
  for (auto f : kFamilies) {
    const auto spec = protocol_spec(f);
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
      measured[f] += occupied_bandwidth(gen_protocol_burst(spec, seed, 1024).samples) / 5.0;
    EXPECT_NEAR(measured[f] / spec.occupied_bandwidth, 1.0, 0.35) << to_string(f);
  }
  EXPECT_GT(measured[ProtocolFamily::wifi_like], 4.0 * measured[ProtocolFamily::zigbee_like]);
  EXPECT_GT(measured[ProtocolFamily::zigbee_like], measured[ProtocolFamily::bt_like]);
  EXPECT_GT(measured[ProtocolFamily::zigbee_like], measured[ProtocolFamily::nrf_like]);
}

TEST(Fingerprint, IdentityIsNoOpAndDrawIsDeterministic) {
  const auto b = gen_protocol_burst(protocol_spec(ProtocolFamily::bt_like), 3);
  EXPECT_EQ(apply_fingerprint(b, Fingerprint::identity(), 1).samples, b.samples);
  const auto fp = draw_fingerprint(4, 10);
  const auto again = draw_fingerprint(4, 10);
  EXPECT_EQ(fp.cfo, again.cfo);
  EXPECT_EQ(fp.a3, again.a3);
  EXPECT_NE(fp.cfo, draw_fingerprint(5, 10).cfo);
  EXPECT_EQ(apply_fingerprint(b, fp, 2).samples, apply_fingerprint(b, fp, 2).samples);
}

TEST(Awgn, MeasuredSnr) {
  const auto b = gen_protocol_burst(protocol_spec(ProtocolFamily::wifi_like), 2);
  EXPECT_EQ(add_awgn(b, std::numeric_limits<double>::infinity(), 1).samples, b.samples);
  for (double snr : {0.0, 10.0, 20.0, 30.0}) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto noisy = add_awgn(b, snr, seed);
      std::vector<Complex> noise(b.size());
      for (std::size_t i = 0; i < b.size(); ++i) noise[i] = noisy.samples[i] - b.samples[i];
      const double measured = 10.0 * std::log10(power(b.samples) / power(noise));
      worst = std::max(worst, std::abs(measured - snr));
    }
    EXPECT_LE(worst, 0.5) << "snr " << snr;
  }
}

TEST(Bandwidth, FamiliesMatchAfterNormalization) {
  BandwidthOptions o;
  o.output_length = kBurstLength;
  std::vector<double> widths;
  for (auto f : kFamilies) {
    const auto spec = protocol_spec(f);
    const auto length = static_cast<std::size_t>(
        std::ceil(kBurstLength * std::max(1.0, o.target / spec.occupied_bandwidth) * 1.5));
    const auto out = normalize_bandwidth(gen_protocol_burst(spec, 7, length), o);
    ASSERT_EQ(out.size(), kBurstLength);
    EXPECT_NEAR(power(out.samples), 1.0, 1e-9);
    widths.push_back(occupied_bandwidth(out.samples));
  }
  const auto [lo, hi] = std::minmax_element(widths.begin(), widths.end());
  EXPECT_LE(*hi / *lo, 1.10);
  for (double w : widths) EXPECT_NEAR(w / o.target, 1.0, 0.10);
}

TEST(Bandwidth, Idempotent) {
  for (auto f : kFamilies) {
    const auto spec = protocol_spec(f);
    BandwidthOptions o;
    o.output_length = kBurstLength;
    const auto length = static_cast<std::size_t>(
        std::ceil(kBurstLength * std::max(1.0, o.target / spec.occupied_bandwidth) * 1.5));
    const auto once = normalize_bandwidth(gen_protocol_burst(spec, 9, length), o);
    const auto twice = normalize_bandwidth(once, o);
    EXPECT_GT(correlation(once.samples, twice.samples), 0.99) << to_string(f);
  }
  IQBurst zero;
  zero.samples.assign(64, Complex{});
  EXPECT_THROW((void)normalize_bandwidth(zero), InvalidArgument);
}

struct StreamCase {
  CaptureStream stream;
  std::vector<IQBurst> bursts;
};

StreamCase make_stream(std::uint64_t seed, double snr_db) {
  StreamCase c;
  std::vector<std::size_t> starts;
  Rng rng(seed);
  std::size_t at = 1500 + rng.below(500);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto fam = kFamilies[i % 4];
    c.bursts.push_back(gen_protocol_burst(protocol_spec(fam), seed * 10 + i));
    starts.push_back(at);
    at += 2 * kBurstLength + 200 + rng.below(800);
  }
  c.stream = make_capture_stream(c.bursts, starts, at + 2000, snr_db, seed);
  return c;
}

TEST(Detection, RisingEdgeWithinEightSamples) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto c = make_stream(seed, 20.0);
    const auto found = detect_bursts(c.stream);
    ASSERT_EQ(found.size(), c.stream.burst_starts.size()) << "seed " << seed;
    for (std::size_t i = 0; i < found.size(); ++i) {
      const auto diff = static_cast<long>(found[i]) - static_cast<long>(c.stream.burst_starts[i]);
      EXPECT_LE(std::abs(diff), 8) << "seed " << seed << " burst " << i;
    }
  }
}

TEST(Detection, NoFalseAlarmsOnNoise) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = make_capture_stream({}, {}, 20000, 20.0, seed);
    EXPECT_TRUE(detect_bursts(c).empty()) << "seed " << seed;
  }
}

TEST(Detection, ExtractionRoundTrip) {
  const auto c = make_stream(3, 30.0);
  for (std::size_t i = 0; i < c.bursts.size(); ++i) {
    const auto got = extract_burst(c.stream, c.stream.burst_starts[i]);
    EXPECT_GT(correlation(got.samples, c.bursts[i].samples), 0.99);
  }
  EXPECT_THROW((void)extract_burst(c.stream, c.stream.samples.size() - 10), InvalidArgument);
}

TEST(Split, StratifiedAndSorted) {
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < 103; ++i) labels.push_back(i % 3);
  std::vector<std::size_t> train, test;
  stratified_split(labels, 3, 0.2, 5, train, test);
  EXPECT_TRUE(std::is_sorted(train.begin(), train.end()));
  EXPECT_TRUE(std::is_sorted(test.begin(), test.end()));
  EXPECT_EQ(train.size() + test.size(), labels.size());
  std::vector<std::size_t> all = train;
  all.insert(all.end(), test.begin(), test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  for (std::size_t c = 0; c < 3; ++c) {
    const auto n = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), c));
    const auto in_train = static_cast<std::size_t>(
        std::count_if(train.begin(), train.end(), [&](std::size_t i) { return labels[i] == c; }));
    EXPECT_EQ(in_train, static_cast<std::size_t>(std::ceil(0.8 * static_cast<double>(n))));
  }
  std::vector<std::size_t> train2, test2;
  stratified_split(labels, 3, 0.2, 5, train2, test2);
  EXPECT_EQ(train, train2);
}

TEST(Datasets, ShapeAndDeterminism) {
  WiprecOptions w;
  w.bursts_per_class = 20;
  const auto a = make_wiprec_dataset(w);
  EXPECT_EQ(a.size(), 80u);
  EXPECT_EQ(a.class_count(), 4u);
  EXPECT_EQ(a.train_indices.size() + a.test_indices.size(), 80u);
  EXPECT_EQ(a.generator.at("generator_version"), kGeneratorVersion);
  const auto b = make_wiprec_dataset(w);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.bursts[i].samples, b.bursts[i].samples);

  const auto sei = make_sei_dataset(5, 10, 30.0, 2);
  EXPECT_EQ(sei.size(), 50u);
  EXPECT_EQ(sei.class_names[3], "dev03");
  for (const auto& burst : sei.bursts) {
    EXPECT_EQ(burst.size(), kBurstLength);
    // float32 quantization: every component survives a float round trip.
    for (auto z : burst.samples) EXPECT_EQ(static_cast<double>(static_cast<float>(z.real())), z.real());
  }
}

// Brute-force 1-NN on FFT magnitudes: the fingerprints must make the
// 10-device task separable before any reservoir is involved.
TEST(Datasets, SeiDevicesAreIdentifiable) {
  const auto d = make_sei_dataset(10, 60, 30.0, 1);
  std::vector<std::vector<double>> feats;
  for (const auto& b : d.bursts) feats.push_back(transforms::fft_magnitude(b));
  std::size_t correct = 0;
  for (auto t : d.test_indices) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t label = 0;
    for (auto r : d.train_indices) {
      double dist = 0.0;
      for (std::size_t i = 0; i < feats[t].size(); ++i) {
        const double e = feats[t][i] - feats[r][i];
        dist += e * e;
      }
      if (dist < best) {
        best = dist;
        label = d.labels[r];
      }
    }
    correct += label == d.labels[t] ? 1 : 0;
  }
  const double acc = static_cast<double>(correct) / static_cast<double>(d.test_indices.size());
  EXPECT_GE(acc, 0.9) << "1-NN accuracy " << acc;
}

}  // namespace
