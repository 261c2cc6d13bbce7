#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dlr/iq.hpp"
#include "dlr/reservoir.hpp"

namespace dlr::transforms {

enum class TransformKind {
  amplitude_subburst,
  fft_mag,
  diff_fft,
  decimated_dft,
  kay_freq,
};

[[nodiscard]] std::string_view to_string(TransformKind kind) noexcept;
[[nodiscard]] TransformKind parse_transform_kind(std::string_view name);

/// Which transform to apply and its parameters. Only the fields relevant to
/// `kind` are read.
struct TransformSpec {
  TransformKind kind = TransformKind::fft_mag;
  std::optional<std::size_t> offset;  ///< sub-burst start; centered if unset
  std::size_t length = 256;           ///< sub-burst length
  std::size_t decimation = 1;         ///< d, keep every d-th DFT column
  std::size_t stride = 4;             ///< frequency-estimate window stride

  /// Output length for a burst of length L. Throws InvalidArgument when the
  /// parameters are inconsistent with L.
  [[nodiscard]] std::size_t output_length(std::size_t burst_length) const;

  friend bool operator==(const TransformSpec&, const TransformSpec&) = default;
};

/// Mean |b[i]| over a training set.
struct MeanAmplitudeProfile {
  std::vector<double> values;
  friend bool operator==(const MeanAmplitudeProfile&,
                         const MeanAmplitudeProfile&) = default;
};

/// |samples[offset + i]| for i < len.
[[nodiscard]] RealSeries amplitude_subburst(const IQBurst& burst,
                                            std::size_t offset, std::size_t len);

/// |D b| with D the 1/L-scaled DFT matrix; length L.
[[nodiscard]] RealSeries fft_magnitude(const IQBurst& burst);

/// FFT magnitude of (|b[i]| - profile[i]) e^{j arg b[i]}, with arg(0) = 0.
[[nodiscard]] RealSeries differential_fft(const IQBurst& burst,
                                          const MeanAmplitudeProfile& profile);

/// Magnitudes of the burst projected on every d-th column of the 1/L-scaled
/// DFT matrix; length L/d. Computed by folding the burst into L/d samples
/// followed by an L/d-point FFT, so D_d is never materialized.
[[nodiscard]] RealSeries decimated_dft(const IQBurst& burst, std::size_t d);

/// Three-sample phase-difference frequency estimates, in cycles/sample,
/// for windows starting at 0, stride, 2*stride, ...
[[nodiscard]] RealSeries kay_freq_estimate(const IQBurst& burst,
                                           std::size_t stride);

[[nodiscard]] MeanAmplitudeProfile compute_mean_amplitude(
    std::span<const IQBurst> training);

/// Dispatches on spec.kind. `profile` is required for diff_fft.
[[nodiscard]] RealSeries apply(const TransformSpec& spec, const IQBurst& burst,
                               const MeanAmplitudeProfile* profile = nullptr);

}  // namespace dlr::transforms
