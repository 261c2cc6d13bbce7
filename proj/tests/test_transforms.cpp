#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "dlr/dft.hpp"
#include "dlr/error.hpp"
#include "dlr/random.hpp"
#include "dlr/transforms.hpp"

namespace {

using namespace dlr;
using namespace dlr::transforms;

IQBurst random_burst(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  IQBurst b;
  b.samples.resize(n);
  for (auto& z : b.samples) z = {rng.normal(), rng.normal()};
  return b;
}

// |D b| with D[m][n] = w^{-mn} / L built explicitly.
std::vector<double> dft_matrix_magnitudes(const IQBurst& b) {
  const std::size_t n = b.size();
  std::vector<double> out(n);
  for (std::size_t m = 0; m < n; ++m) {
    Complex acc{};
    for (std::size_t k = 0; k < n; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((m * k) % n) /
                           static_cast<double>(n);
      acc += std::polar(1.0, angle) * b.samples[k];
    }
    out[m] = std::abs(acc) / static_cast<double>(n);
  }
  return out;
}

void expect_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "index " << i;
}

TEST(Dft, InverseRoundTrip) {
  const auto b = random_burst(64, 1);
  const auto back = ifft(fft(b.samples));
  for (std::size_t i = 0; i < b.size(); ++i)
    EXPECT_NEAR(std::abs(back[i] / 64.0 - b.samples[i]), 0.0, 1e-12);
}

TEST(FftMagnitude, MatchesDftMatrix) {
  for (std::size_t n : {8u, 16u, 64u}) {
    const auto b = random_burst(n, n);
    expect_close(fft_magnitude(b), dft_matrix_magnitudes(b), 1e-9);
  }
}

TEST(FftMagnitude, ParsevalScaling) {
  const auto b = random_burst(1024, 5);
  double time = 0.0, freq = 0.0;
  for (auto z : b.samples) time += std::norm(z);
  for (double v : fft_magnitude(b)) freq += v * v;
  EXPECT_NEAR(freq * 1024.0, time, 1e-9 * time);
}

TEST(DecimatedDft, UnitDecimationIsFft) {
  for (std::size_t n : {8u, 64u, 1024u}) {
    const auto b = random_burst(n, 10 + n);
    expect_close(decimated_dft(b, 1), fft_magnitude(b), 1e-9);
  }
}

TEST(DecimatedDft, KeepsEveryDthColumn) {
  for (std::size_t n : {8u, 32u, 64u}) {
    const auto b = random_burst(n, 20 + n);
    const auto full = dft_matrix_magnitudes(b);
    for (std::size_t d : {1u, 2u, 4u, 8u}) {
      std::vector<double> want;
      for (std::size_t m = 0; m < n; m += d) want.push_back(full[m]);
      expect_close(decimated_dft(b, d), want, 1e-9);
    }
  }
}

TEST(DecimatedDft, Golden) {
  IQBurst b;
  b.samples.assign(4, Complex{1.0, 0.0});
  const auto out = decimated_dft(b, 2);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_NEAR(out[0], 1.0, 1e-15);
  EXPECT_NEAR(out[1], 0.0, 1e-15);
  EXPECT_THROW((void)decimated_dft(b, 3), InvalidArgument);
  EXPECT_THROW((void)decimated_dft(b, 0), InvalidArgument);
}

TEST(Kay, ExactOnNoiselessTones) {
  Rng rng(77);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const double f = rng.uniform(-0.45, 0.45);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    IQBurst b;
    for (int n = 0; n < 256; ++n)
      b.samples.push_back(std::polar(1.3, phase + 2.0 * std::numbers::pi * f * n));
    for (double est : kay_freq_estimate(b, 4)) worst = std::max(worst, std::abs(est - f));
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Kay, LengthAndErrors) {
  const auto b = random_burst(1024, 2);
  TransformSpec spec{TransformKind::kay_freq};
  spec.stride = 4;
  EXPECT_EQ(kay_freq_estimate(b, 4).size(), spec.output_length(1024));
  EXPECT_THROW((void)kay_freq_estimate(random_burst(2, 0), 1), InvalidArgument);
  EXPECT_THROW((void)kay_freq_estimate(b, 0), InvalidArgument);
}

TEST(AmplitudeSubburst, Values) {
  IQBurst b;
  b.samples = {{3, 4}, {0, 1}, {-1, 0}, {0, 0}};
  EXPECT_EQ(amplitude_subburst(b, 1, 2), (std::vector<double>{1, 1}));
  EXPECT_THROW((void)amplitude_subburst(b, 3, 2), InvalidArgument);
}

TEST(DifferentialFft, ZeroProfileIsPlainFft) {
  const auto b = random_burst(64, 3);
  MeanAmplitudeProfile zero{std::vector<double>(64, 0.0)};
  expect_close(differential_fft(b, zero), fft_magnitude(b), 1e-12);
}

TEST(DifferentialFft, OwnProfileCancels) {
  const auto b = random_burst(64, 4);
  const IQBurst one[] = {b};
  for (double v : differential_fft(b, compute_mean_amplitude(one))) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(DifferentialFft, PreservesPhase) {
  // Subtracting half the amplitude leaves half the burst, so the spectrum
  // halves exactly.
  const auto b = random_burst(32, 6);
  MeanAmplitudeProfile half;
  for (auto z : b.samples) half.values.push_back(0.5 * std::abs(z));
  const auto full = fft_magnitude(b);
  const auto diff = differential_fft(b, half);
  for (std::size_t i = 0; i < full.size(); ++i) EXPECT_NEAR(diff[i], 0.5 * full[i], 1e-12);
}

TEST(MeanAmplitude, AveragesAndChecks) {
  IQBurst a, b;
  a.samples = {{3, 4}, {1, 0}};
  b.samples = {{0, 1}, {0, 3}};
  const IQBurst both[] = {a, b};
  EXPECT_EQ(compute_mean_amplitude(both).values, (std::vector<double>{3, 2}));
  EXPECT_THROW((void)compute_mean_amplitude(std::span<const IQBurst>{}), InvalidArgument);
  IQBurst short_one;
  short_one.samples = {{1, 0}};
  const IQBurst uneven[] = {a, short_one};
  EXPECT_THROW((void)compute_mean_amplitude(uneven), InvalidArgument);
}

TEST(Apply, DispatchAndLengths) {
  const auto b = random_burst(1024, 8);
  TransformSpec fft_spec{TransformKind::fft_mag};
  EXPECT_EQ(apply(fft_spec, b), fft_magnitude(b));
  TransformSpec dec{TransformKind::decimated_dft};
  dec.decimation = 8;
  EXPECT_EQ(apply(dec, b).size(), 128u);
  EXPECT_EQ(dec.output_length(1024), 128u);
  TransformSpec amp{TransformKind::amplitude_subburst};
  amp.length = 256;
  EXPECT_EQ(apply(amp, b), amplitude_subburst(b, 384, 256));
  TransformSpec diff{TransformKind::diff_fft};
  EXPECT_THROW((void)apply(diff, b), InvalidArgument);
  dec.decimation = 3;
  EXPECT_THROW((void)dec.output_length(1024), InvalidArgument);
  EXPECT_EQ(parse_transform_kind(to_string(TransformKind::kay_freq)), TransformKind::kay_freq);
  EXPECT_THROW((void)parse_transform_kind("wavelet"), InvalidArgument);
}

}  // namespace
