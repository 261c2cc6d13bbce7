#include "dlr/transforms.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dlr/dft.hpp"
#include "dlr/error.hpp"

namespace dlr::transforms {

std::string_view to_string(TransformKind kind) noexcept {
  switch (kind) {
    case TransformKind::amplitude_subburst:
      return "amplitude_subburst";
    case TransformKind::fft_mag:
      return "fft_mag";
    case TransformKind::diff_fft:
      return "diff_fft";
    case TransformKind::decimated_dft:
      return "decimated_dft";
    case TransformKind::kay_freq:
      return "kay_freq";
  }
  return "fft_mag";
}

TransformKind parse_transform_kind(std::string_view name) {
  if (name == "amplitude_subburst") return TransformKind::amplitude_subburst;
  if (name == "fft_mag") return TransformKind::fft_mag;
  if (name == "diff_fft") return TransformKind::diff_fft;
  if (name == "decimated_dft") return TransformKind::decimated_dft;
  if (name == "kay_freq") return TransformKind::kay_freq;
  throw InvalidArgument("unknown transform '" + std::string(name) + "'");
}

std::size_t TransformSpec::output_length(std::size_t burst_length) const {
  if (burst_length == 0) throw InvalidArgument("burst length must be > 0");
  switch (kind) {
    case TransformKind::amplitude_subburst: {
      if (length == 0 || length > burst_length)
        throw InvalidArgument("sub-burst length " + std::to_string(length) +
                              " does not fit burst length " +
                              std::to_string(burst_length));
      const std::size_t start = offset.value_or((burst_length - length) / 2);
      if (start + length > burst_length)
        throw InvalidArgument("sub-burst window [" + std::to_string(start) + ", " +
                              std::to_string(start + length) +
                              ") exceeds burst length " +
                              std::to_string(burst_length));
      return length;
    }
    case TransformKind::fft_mag:
    case TransformKind::diff_fft:
      return burst_length;
    case TransformKind::decimated_dft:
      if (decimation == 0 || burst_length % decimation != 0)
        throw InvalidArgument("decimation " + std::to_string(decimation) +
                              " does not divide burst length " +
                              std::to_string(burst_length));
      return burst_length / decimation;
    case TransformKind::kay_freq:
      if (burst_length < 3)
        throw InvalidArgument("frequency estimates need at least 3 samples");
      if (stride == 0) throw InvalidArgument("frequency-estimate stride must be >= 1");
      return (burst_length - 3) / stride + 1;
  }
  return burst_length;
}

namespace {

void check_burst(const IQBurst& burst) {
  if (burst.samples.empty()) throw InvalidArgument("burst must be non-empty");
  for (std::size_t i = 0; i < burst.size(); ++i) {
    const auto& z = burst.samples[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw InvalidArgument("burst sample " + std::to_string(i) + " is not finite");
  }
}

RealSeries scaled_magnitudes(const std::vector<Complex>& spectrum,
                             double scale) {
  RealSeries out(spectrum.size());
  for (std::size_t i = 0; i < spectrum.size(); ++i)
    out[i] = std::abs(spectrum[i]) * scale;
  return out;
}

}  // namespace

RealSeries amplitude_subburst(const IQBurst& burst, std::size_t offset,
                              std::size_t len) {
  check_burst(burst);
  if (len == 0 || offset > burst.size() || len > burst.size() - offset)
    throw InvalidArgument("sub-burst window [" + std::to_string(offset) + ", " +
                          std::to_string(offset + len) + ") exceeds burst length " +
                          std::to_string(burst.size()));
  RealSeries out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = std::abs(burst.samples[offset + i]);
  return out;
}

RealSeries fft_magnitude(const IQBurst& burst) {
  check_burst(burst);
  return scaled_magnitudes(fft(burst.samples), 1.0 / static_cast<double>(burst.size()));
}

RealSeries differential_fft(const IQBurst& burst,
                            const MeanAmplitudeProfile& profile) {
  check_burst(burst);
  if (profile.values.size() != burst.size())
    throw InvalidArgument("amplitude profile length " +
                          std::to_string(profile.values.size()) +
                          " does not match burst length " +
                          std::to_string(burst.size()));
  std::vector<Complex> residual(burst.size());
  for (std::size_t i = 0; i < burst.size(); ++i) {
    const Complex z = burst.samples[i];
    const double magnitude = std::abs(z);
    // Rescaling z keeps its phase exactly; arg(0) is taken as 0.
    residual[i] = magnitude > 0.0
                      ? z * ((magnitude - profile.values[i]) / magnitude)
                      : Complex{-profile.values[i], 0.0};
  }
  return scaled_magnitudes(fft(residual), 1.0 / static_cast<double>(burst.size()));
}

RealSeries decimated_dft(const IQBurst& burst, std::size_t d) {
  check_burst(burst);
  const std::size_t length = burst.size();
  if (d == 0 || length % d != 0)
    throw InvalidArgument("decimation " + std::to_string(d) +
                          " does not divide burst length " + std::to_string(length));
  // Column m*d of D only sees b through its period-(L/d) fold.
  const std::size_t folded_length = length / d;
  std::vector<Complex> folded(folded_length, Complex{});
  for (std::size_t p = 0; p < d; ++p)
    for (std::size_t q = 0; q < folded_length; ++q)
      folded[q] += burst.samples[p * folded_length + q];
  return scaled_magnitudes(fft(folded), 1.0 / static_cast<double>(length));
}

RealSeries kay_freq_estimate(const IQBurst& burst, std::size_t stride) {
  check_burst(burst);
  if (burst.size() < 3)
    throw InvalidArgument("frequency estimates need at least 3 samples");
  if (stride == 0) throw InvalidArgument("frequency-estimate stride must be >= 1");
  const auto& b = burst.samples;
  RealSeries out;
  out.reserve((b.size() - 3) / stride + 1);
  for (std::size_t p = 0; p + 2 < b.size(); p += stride) {
    const double d1 = std::arg(b[p + 1] * std::conj(b[p]));
    const double d2 = std::arg(b[p + 2] * std::conj(b[p + 1]));
    out.push_back(0.5 * (d1 + d2) / (2.0 * std::numbers::pi));
  }
  return out;
}

MeanAmplitudeProfile compute_mean_amplitude(std::span<const IQBurst> training) {
  if (training.empty())
    throw InvalidArgument("mean amplitude needs at least one burst");
  const std::size_t length = training.front().size();
  MeanAmplitudeProfile profile;
  profile.values.assign(length, 0.0);
  for (const auto& burst : training) {
    if (burst.size() != length)
      throw InvalidArgument("bursts have unequal lengths");
    for (std::size_t i = 0; i < length; ++i)
      profile.values[i] += std::abs(burst.samples[i]);
  }
  const double inv = 1.0 / static_cast<double>(training.size());
  for (double& v : profile.values) v *= inv;
  return profile;
}

RealSeries apply(const TransformSpec& spec, const IQBurst& burst,
                 const MeanAmplitudeProfile* profile) {
  switch (spec.kind) {
    case TransformKind::amplitude_subburst: {
      (void)spec.output_length(burst.size());
      const std::size_t start =
          spec.offset.value_or((burst.size() - spec.length) / 2);
      return amplitude_subburst(burst, start, spec.length);
    }
    case TransformKind::fft_mag:
      return fft_magnitude(burst);
    case TransformKind::diff_fft:
      if (profile == nullptr)
        throw InvalidArgument("diff_fft requires a mean amplitude profile");
      return differential_fft(burst, *profile);
    case TransformKind::decimated_dft:
      return decimated_dft(burst, spec.decimation);
    case TransformKind::kay_freq:
      return kay_freq_estimate(burst, spec.stride);
  }
  throw InvalidArgument("unhandled transform kind");
}

}  // namespace dlr::transforms
