#pragma once

// Synthetic RF data standing in for over-the-air captures: ISM-like protocol
// waveforms, per-device transmitter impairments, channel noise, and
// rising-edge burst detection/extraction. Waveforms are simplified
// look-alikes, not standards-compliant modems.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dlr/iq.hpp"

namespace dlr::synthrf {

inline constexpr double kSampleRate = 100e6;
inline constexpr std::size_t kBurstLength = 1024;
inline constexpr int kGeneratorVersion = 1;

enum class ProtocolFamily { wifi_like, bt_like, zigbee_like, nrf_like };
enum class Modulation { ofdm, gfsk, oqpsk_half_sine };

[[nodiscard]] std::string_view to_string(ProtocolFamily f) noexcept;
[[nodiscard]] std::string_view to_string(Modulation m) noexcept;
[[nodiscard]] ProtocolFamily parse_family(std::string_view name);

/// Waveform recipe. Rates and bandwidths are fractions of the sample rate.
struct ProtocolSpec {
  ProtocolFamily family = ProtocolFamily::wifi_like;
  Modulation modulation = Modulation::ofdm;
  double symbol_rate = 0.0;          ///< symbols (chips) per sample
  double modulation_index = 0.0;     ///< FSK only
  double bandwidth_time = 0.5;       ///< Gaussian BT, FSK only
  double occupied_bandwidth = 0.0;   ///< nominal -20 dB width
  std::size_t ramp_length = 16;      ///< raised-cosine ramp at both ends
};

/// Default recipe for each family.
[[nodiscard]] ProtocolSpec protocol_spec(ProtocolFamily family);

/// Transmitter impairments of one device.
struct Fingerprint {
  std::size_t device_id = 0;
  double iq_gain_imbalance_db = 0.0;
  double iq_phase_skew = 0.0;  ///< radians
  Complex dc_offset{};
  double cfo = 0.0;  ///< cycles/sample
  double a1 = 1.0, a3 = 0.0, a5 = 0.0;
  double phase_noise_std = 0.0;  ///< radians/sample random walk

  /// a1 = 1, everything else zero.
  [[nodiscard]] static Fingerprint identity(std::size_t device_id = 0);
};

/// Spread of fingerprint parameters; each value is the half-width of a
/// uniform draw around the center.
struct FingerprintSpread {
  double iq_gain_imbalance_db = 0.4;
  double iq_phase_skew = 0.04;
  double dc_offset = 0.02;
  double cfo = 4e-4;
  double a3_center = -0.08, a3 = 0.05;
  double a5_center = 0.0, a5 = 0.015;
  double phase_noise_max = 2e-3;
};

/// Deterministic fingerprint for (device_id, seed).
[[nodiscard]] Fingerprint draw_fingerprint(std::size_t device_id, std::uint64_t seed,
                                           const FingerprintSpread& spread = {});

/// Clean burst with unit average power, a deterministic function of
/// (spec, payload_seed, length). Bursts start with the family's preamble.
[[nodiscard]] IQBurst gen_protocol_burst(const ProtocolSpec& spec,
                                         std::uint64_t payload_seed,
                                         std::size_t length = kBurstLength);

/// IQ imbalance -> DC offset -> odd-order PA polynomial -> CFO rotation ->
/// phase-noise random walk. Identity stages are skipped, so the identity
/// fingerprint returns the input unchanged.
[[nodiscard]] IQBurst apply_fingerprint(const IQBurst& burst, const Fingerprint& fp,
                                        std::uint64_t noise_seed);

/// Complex AWGN at the given SNR relative to the measured burst power.
/// An infinite SNR returns the input unchanged.
[[nodiscard]] IQBurst add_awgn(const IQBurst& burst, double snr_db, std::uint64_t seed);

/// Width (cycles/sample) of the span where the smoothed power spectrum is
/// within 20 dB of its peak.
[[nodiscard]] double occupied_bandwidth(std::span<const Complex> samples);

struct BandwidthOptions {
  double target = 0.04;  ///< cycles/sample
  double tolerance = 0.05;  ///< relative; inside it the burst is returned as is
  std::size_t iterations = 8;
  std::optional<std::size_t> output_length;  ///< defaults to the input length
};

/// Resamples the burst (band-limited interpolation) so its occupied
/// bandwidth matches options.target. Bursts that must be sped up consume
/// more input than they produce; supply a long enough burst and request a
/// shorter output_length. Throws InvalidArgument for a zero-energy burst.
[[nodiscard]] IQBurst normalize_bandwidth(const IQBurst& burst,
                                          const BandwidthOptions& options = {});

struct CaptureStream {
  std::vector<Complex> samples;
  double sample_rate = kSampleRate;
  std::vector<std::size_t> burst_starts;  ///< ground truth
};

/// Noise-only stream of the given length with the bursts placed at
/// `starts` (which must leave at least one burst length of silence between
/// bursts). Noise power is set so that each burst has the given SNR.
[[nodiscard]] CaptureStream make_capture_stream(std::span<const IQBurst> bursts,
                                                std::span<const std::size_t> starts,
                                                std::size_t length, double snr_db,
                                                std::uint64_t seed);

struct DetectorOptions {
  double threshold_factor = 4.0;
  std::size_t window = 16;
  std::size_t holdoff = kBurstLength;
};

/// Rising-edge detector: trailing moving-average power against
/// threshold_factor times the median (noise floor) of that average. One
/// detection per burst thanks to the hold-off.
[[nodiscard]] std::vector<std::size_t> detect_bursts(const CaptureStream& stream,
                                                     const DetectorOptions& options = {});

/// L samples starting at index; throws InvalidArgument when fewer remain.
[[nodiscard]] IQBurst extract_burst(const CaptureStream& stream, std::size_t index,
                                    std::size_t length = kBurstLength);

/// Labeled bursts plus a fixed stratified train/test split.
struct Dataset {
  std::vector<IQBurst> bursts;
  std::vector<std::size_t> labels;
  std::vector<std::string> class_names;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  nlohmann::json generator;  ///< parameters, for provenance

  [[nodiscard]] std::size_t size() const noexcept { return bursts.size(); }
  [[nodiscard]] std::size_t class_count() const noexcept { return class_names.size(); }
};

/// Per class, shuffle with `seed` and put the first ceil((1 - test_fraction)
/// * n) members in the training set. Both index lists come back sorted.
void stratified_split(std::span<const std::size_t> labels, std::size_t class_count,
                      double test_fraction, std::uint64_t seed,
                      std::vector<std::size_t>& train, std::vector<std::size_t>& test);

struct SeiOptions {
  std::size_t n_devices = 20;
  std::size_t bursts_per_device = 400;
  double snr_db = 30.0;
  std::uint64_t seed = 1;
  double test_fraction = 0.2;
  std::size_t burst_length = kBurstLength;
  FingerprintSpread spread{};
};

/// Specific-emitter task: every device sends the same wifi-like preamble
/// through its own fingerprint. Bursts are quantized to float32.
[[nodiscard]] Dataset make_sei_dataset(const SeiOptions& options);

/// Convenience overload mirroring the operation signature.
[[nodiscard]] Dataset make_sei_dataset(std::size_t n_devices,
                                       std::size_t bursts_per_device, double snr_db,
                                       std::uint64_t seed);

struct WiprecOptions {
  std::size_t bursts_per_class = 200;
  bool clean = true;          ///< no channel noise when true
  double snr_db = 20.0;       ///< used when !clean
  bool bw_normalized = false;
  std::uint64_t seed = 1;
  double test_fraction = 0.2;
  std::size_t burst_length = kBurstLength;
  std::size_t devices_per_class = 5;
  /// Carrier offset left after basebanding, drawn per burst uniformly
  /// within +-residual_offset times the family's occupied bandwidth.
  double residual_offset = 0.0;
  BandwidthOptions bandwidth{};
};

/// Protocol-recognition task over the four families; each class draws its
/// bursts from `devices_per_class` fingerprints (all but the last share a
/// manufacturer-level center). Bursts are quantized to float32.
[[nodiscard]] Dataset make_wiprec_dataset(const WiprecOptions& options);

[[nodiscard]] Dataset make_wiprec_dataset(std::size_t bursts_per_class, bool clean,
                                          bool bw_normalized, std::uint64_t seed);

}  // namespace dlr::synthrf
