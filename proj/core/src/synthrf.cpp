#include "dlr/synthrf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "dlr/dft.hpp"
#include "dlr/error.hpp"
#include "dlr/random.hpp"

namespace dlr::synthrf {

std::string_view to_string(ProtocolFamily f) noexcept {
  switch (f) {
    case ProtocolFamily::wifi_like:
      return "wifi_like";
    case ProtocolFamily::bt_like:
      return "bt_like";
    case ProtocolFamily::zigbee_like:
      return "zigbee_like";
    case ProtocolFamily::nrf_like:
      return "nrf_like";
  }
  return "wifi_like";
}

std::string_view to_string(Modulation m) noexcept {
  switch (m) {
    case Modulation::ofdm:
      return "ofdm";
    case Modulation::gfsk:
      return "gfsk";
    case Modulation::oqpsk_half_sine:
      return "oqpsk_half_sine";
  }
  return "ofdm";
}

ProtocolFamily parse_family(std::string_view name) {
  for (auto f : {ProtocolFamily::wifi_like, ProtocolFamily::bt_like,
                 ProtocolFamily::zigbee_like, ProtocolFamily::nrf_like}) {
    if (name == to_string(f)) return f;
  }
  throw InvalidArgument("unknown protocol family '" + std::string(name) + "'");
}

ProtocolSpec protocol_spec(ProtocolFamily family) {
  ProtocolSpec s;
  s.family = family;
  switch (family) {
    case ProtocolFamily::wifi_like:
      // 320-point OFDM at 100 MHz: 312.5 kHz subcarriers, +-26 occupied.
      s.modulation = Modulation::ofdm;
      s.symbol_rate = 1.0 / 400.0;
      s.occupied_bandwidth = 0.17;
      break;
    case ProtocolFamily::bt_like:
      s.modulation = Modulation::gfsk;
      s.symbol_rate = 0.01;
      s.modulation_index = 0.32;
      s.bandwidth_time = 0.5;
      s.occupied_bandwidth = 0.010;
      break;
    case ProtocolFamily::zigbee_like:
      s.modulation = Modulation::oqpsk_half_sine;
      s.symbol_rate = 0.02;  // chip rate
      s.occupied_bandwidth = 0.026;
      break;
    case ProtocolFamily::nrf_like:
      s.modulation = Modulation::gfsk;
      s.symbol_rate = 0.0025;
      s.modulation_index = 1.28;
      s.bandwidth_time = 0.5;
      s.occupied_bandwidth = 0.011;
      break;
  }
  return s;
}

Fingerprint Fingerprint::identity(std::size_t device_id) {
  Fingerprint fp;
  fp.device_id = device_id;
  return fp;
}

Fingerprint draw_fingerprint(std::size_t device_id, std::uint64_t seed,
                             const FingerprintSpread& spread) {
  Rng rng(derive_seed(seed, {0xf1U, device_id}));
  Fingerprint fp;
  fp.device_id = device_id;
  fp.iq_gain_imbalance_db = rng.uniform(-1.0, 1.0) * spread.iq_gain_imbalance_db;
  fp.iq_phase_skew = rng.uniform(-1.0, 1.0) * spread.iq_phase_skew;
  fp.dc_offset = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)) * spread.dc_offset;
  fp.cfo = rng.uniform(-1.0, 1.0) * spread.cfo;
  fp.a1 = 1.0;
  fp.a3 = spread.a3_center + rng.uniform(-1.0, 1.0) * spread.a3;
  fp.a5 = spread.a5_center + rng.uniform(-1.0, 1.0) * spread.a5;
  fp.phase_noise_std = rng.uniform() * spread.phase_noise_max;
  return fp;
}

namespace {

constexpr std::size_t kOfdmSize = 320;  // 20 MHz OFDM upsampled x5
constexpr std::size_t kOfdmCp = 80;

// Short and long training fields over subcarriers -26..26.
constexpr std::array<int, 53> kLongTraining = {
    1, 1,  -1, -1, 1,  1,  -1, 1,  -1, 1,  1,  1,  1,  1,  1,  -1, -1, 1,
    1, -1, 1,  -1, 1,  1,  1,  1,  0,  1,  -1, -1, 1,  1,  -1, 1,  -1, 1,
    -1, -1, -1, -1, -1, 1,  1,  -1, -1, 1,  -1, 1,  -1, 1,  1,  1,  1};
// Nonzero short-training subcarriers (every 4th) and their sign.
constexpr std::array<std::pair<int, int>, 12> kShortTraining = {{
    {-24, 1}, {-20, -1}, {-16, 1}, {-12, -1}, {-8, -1}, {-4, 1},
    {4, -1}, {8, -1}, {12, 1}, {16, 1}, {20, 1}, {24, 1}}};

// Zigbee-like preamble symbol: 32 chips.
constexpr std::array<int, 32> kPreambleChips = {1, 1, 0, 1, 1, 0, 0, 1, 1, 1, 0,
                                                0, 0, 0, 1, 1, 0, 1, 0, 1, 0, 0,
                                                1, 0, 0, 0, 1, 0, 1, 1, 1, 0};

std::vector<Complex> ofdm_symbol(const std::vector<std::pair<int, Complex>>& carriers) {
  std::vector<Complex> freq(kOfdmSize, Complex{});
  for (const auto& [k, v] : carriers) {
    const auto idx = static_cast<std::size_t>((k + static_cast<int>(kOfdmSize)) %
                                              static_cast<int>(kOfdmSize));
    freq[idx] = v;
  }
  auto time = ifft(freq);
  for (auto& z : time) z /= static_cast<double>(kOfdmSize);
  return time;
}

std::vector<Complex> wifi_waveform(std::uint64_t payload_seed, std::size_t length) {
  std::vector<Complex> out;
  out.reserve(length + kOfdmSize + kOfdmCp);

  std::vector<std::pair<int, Complex>> stf;
  const double stf_scale = std::sqrt(13.0 / 6.0);
  for (auto [k, sign] : kShortTraining)
    stf.emplace_back(k, Complex(sign, sign) * stf_scale);
  const auto stf_symbol = ofdm_symbol(stf);  // period 80 samples
  for (std::size_t n = 0; n < 800 && out.size() < length; ++n)
    out.push_back(stf_symbol[n % kOfdmSize]);

  std::vector<std::pair<int, Complex>> ltf;
  for (int k = -26; k <= 26; ++k)
    if (kLongTraining[static_cast<std::size_t>(k + 26)] != 0)
      ltf.emplace_back(k, Complex(kLongTraining[static_cast<std::size_t>(k + 26)], 0.0));
  const auto ltf_symbol = ofdm_symbol(ltf);
  for (std::size_t n = kOfdmSize - 2 * kOfdmCp; n < kOfdmSize && out.size() < length; ++n)
    out.push_back(ltf_symbol[n]);
  for (int rep = 0; rep < 2; ++rep)
    for (std::size_t n = 0; n < kOfdmSize && out.size() < length; ++n)
      out.push_back(ltf_symbol[n]);

  Rng rng(derive_seed(payload_seed, {0xda7aU}));
  const double qpsk = std::numbers::sqrt2 / 2.0;
  while (out.size() < length) {
    std::vector<std::pair<int, Complex>> data;
    for (int k = -26; k <= 26; ++k) {
      if (k == 0) continue;
      if (k == -21 || k == -7 || k == 7) {
        data.emplace_back(k, Complex(1.0, 0.0));
      } else if (k == 21) {
        data.emplace_back(k, Complex(-1.0, 0.0));
      } else {
        const auto bits = rng.bits();
        data.emplace_back(k, Complex((bits & 1U) ? qpsk : -qpsk, (bits & 2U) ? qpsk : -qpsk));
      }
    }
    const auto sym = ofdm_symbol(data);
    for (std::size_t n = kOfdmSize - kOfdmCp; n < kOfdmSize && out.size() < length; ++n)
      out.push_back(sym[n]);
    for (std::size_t n = 0; n < kOfdmSize && out.size() < length; ++n) out.push_back(sym[n]);
  }
  return out;
}

std::vector<int> fsk_bits(ProtocolFamily family, std::uint64_t payload_seed,
                          std::size_t count) {
  std::vector<int> bits;
  if (family == ProtocolFamily::bt_like) {
    bits = {1, 0, 1, 0};
  } else {
    bits = {0, 1, 0, 1, 0, 1, 0, 1};
  }
  Rng rng(derive_seed(payload_seed, {0xb175U}));
  while (bits.size() < count) bits.push_back(static_cast<int>(rng.bits() >> 63));
  return bits;
}

std::vector<Complex> gfsk_waveform(const ProtocolSpec& spec, std::uint64_t payload_seed,
                                   std::size_t length) {
  const double sps = 1.0 / spec.symbol_rate;
  const std::size_t n_symbols = static_cast<std::size_t>(std::ceil(length / sps)) + 4;
  const auto bits = fsk_bits(spec.family, payload_seed, n_symbols);

  // Gaussian frequency pulse, +-2 symbols, unit DC gain.
  const double sigma = std::sqrt(std::log(2.0)) / (2.0 * std::numbers::pi * spec.bandwidth_time) * sps;
  const auto half = static_cast<std::ptrdiff_t>(std::ceil(2.0 * sps));
  std::vector<double> taps;
  for (std::ptrdiff_t t = -half; t <= half; ++t)
    taps.push_back(std::exp(-0.5 * static_cast<double>(t * t) / (sigma * sigma)));
  const double tap_sum = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (auto& t : taps) t /= tap_sum;

  std::vector<double> nrz(length + 2 * static_cast<std::size_t>(half));
  for (std::size_t n = 0; n < nrz.size(); ++n) {
    const auto sym = static_cast<std::size_t>(static_cast<double>(n) / sps);
    nrz[n] = bits[std::min(sym, bits.size() - 1)] != 0 ? 1.0 : -1.0;
  }
  const double deviation = 0.5 * spec.modulation_index * spec.symbol_rate;
  std::vector<Complex> out(length);
  double phase = 0.0;
  for (std::size_t n = 0; n < length; ++n) {
    double freq = 0.0;
    for (std::size_t t = 0; t < taps.size(); ++t) freq += taps[t] * nrz[n + t];
    out[n] = std::polar(1.0, phase);
    phase += 2.0 * std::numbers::pi * deviation * freq;
  }
  return out;
}

std::vector<Complex> oqpsk_waveform(const ProtocolSpec& spec, std::uint64_t payload_seed,
                                    std::size_t length) {
  const double tc = 1.0 / spec.symbol_rate;
  const std::size_t n_chips = static_cast<std::size_t>(std::ceil(length / tc)) + 2;
  std::vector<int> chips;
  for (int rep = 0; rep < 8 && chips.size() < n_chips; ++rep)
    chips.insert(chips.end(), kPreambleChips.begin(), kPreambleChips.end());
  Rng rng(derive_seed(payload_seed, {0xc41bU}));
  while (chips.size() < n_chips) chips.push_back(static_cast<int>(rng.bits() >> 63));

  std::vector<Complex> out(length, Complex{});
  for (std::size_t k = 0; k < chips.size(); ++k) {
    const double value = chips[k] != 0 ? 1.0 : -1.0;
    const double start = static_cast<double>(k) * tc;
    const auto first = static_cast<std::size_t>(std::ceil(start));
    for (std::size_t n = first; n < length && static_cast<double>(n) < start + 2.0 * tc; ++n) {
      const double pulse = std::sin(std::numbers::pi * (static_cast<double>(n) - start) / (2.0 * tc));
      if (k % 2 == 0) {
        out[n] += Complex(value * pulse, 0.0);
      } else {
        out[n] += Complex(0.0, value * pulse);
      }
    }
  }
  return out;
}

void apply_ramp(std::vector<Complex>& x, std::size_t ramp) {
  if (ramp == 0) return;
  const std::size_t r = std::min(ramp, x.size() / 2);
  for (std::size_t n = 0; n < r; ++n) {
    const double w = 0.5 - 0.5 * std::cos(std::numbers::pi * (static_cast<double>(n) + 0.5) /
                                          static_cast<double>(r));
    x[n] *= w;
    x[x.size() - 1 - n] *= w;
  }
}

double mean_power(std::span<const Complex> x) {
  if (x.empty()) return 0.0;
  double p = 0.0;
  for (const auto& z : x) p += std::norm(z);
  return p / static_cast<double>(x.size());
}

void scale_to_unit_power(std::vector<Complex>& x) {
  const double p = mean_power(x);
  if (p <= 0.0) return;
  const double g = 1.0 / std::sqrt(p);
  for (auto& z : x) z *= g;
}

void quantize_float32(IQBurst& b) {
  for (auto& z : b.samples)
    z = Complex(static_cast<float>(z.real()), static_cast<float>(z.imag()));
}

double blackman_sinc(double x, double half_width) {
  if (std::abs(x) >= half_width) return 0.0;
  const double window = 0.42 + 0.5 * std::cos(std::numbers::pi * x / half_width) +
                        0.08 * std::cos(2.0 * std::numbers::pi * x / half_width);
  if (x == 0.0) return window;
  const double px = std::numbers::pi * x;
  return window * std::sin(px) / px;
}

// out[n] = x(n * rate) by windowed-sinc interpolation; the kernel is
// widened by `rate` when decimating so the result stays alias-free.
std::vector<Complex> resample(std::span<const Complex> x, double rate, std::size_t length) {
  constexpr double kHalfWidth = 16.0;
  const double stretch = std::max(1.0, rate);
  const double reach = kHalfWidth * stretch;
  std::vector<Complex> out(length, Complex{});
  for (std::size_t n = 0; n < length; ++n) {
    const double t = static_cast<double>(n) * rate;
    if (t > static_cast<double>(x.size() - 1)) break;
    const auto lo = static_cast<std::ptrdiff_t>(std::ceil(t - reach));
    const auto hi = static_cast<std::ptrdiff_t>(std::floor(t + reach));
    Complex acc{};
    for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(lo, 0);
         k <= std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(x.size()) - 1); ++k) {
      acc += x[static_cast<std::size_t>(k)] *
             (blackman_sinc((t - static_cast<double>(k)) / stretch, kHalfWidth) / stretch);
    }
    out[n] = acc;
  }
  return out;
}

bool within(double value, double target, double tolerance) {
  return std::abs(value / target - 1.0) <= tolerance;
}

}  // namespace

IQBurst gen_protocol_burst(const ProtocolSpec& spec, std::uint64_t payload_seed,
                           std::size_t length) {
  if (length < 64) throw InvalidArgument("protocol bursts need at least 64 samples");
  IQBurst b;
  b.sample_rate = kSampleRate;
  b.meta.label = std::string(to_string(spec.family));
  switch (spec.modulation) {
    case Modulation::ofdm:
      b.samples = wifi_waveform(payload_seed, length);
      break;
    case Modulation::gfsk:
      b.samples = gfsk_waveform(spec, payload_seed, length);
      break;
    case Modulation::oqpsk_half_sine:
      b.samples = oqpsk_waveform(spec, payload_seed, length);
      break;
  }
  apply_ramp(b.samples, spec.ramp_length);
  scale_to_unit_power(b.samples);
  return b;
}

IQBurst apply_fingerprint(const IQBurst& burst, const Fingerprint& fp,
                          std::uint64_t noise_seed) {
  IQBurst out = burst;
  auto& x = out.samples;
  if (fp.iq_gain_imbalance_db != 0.0 || fp.iq_phase_skew != 0.0) {
    const double g = std::pow(10.0, fp.iq_gain_imbalance_db / 20.0);
    const double s = std::sin(fp.iq_phase_skew), c = std::cos(fp.iq_phase_skew);
    for (auto& z : x) z = Complex(z.real(), g * (s * z.real() + c * z.imag()));
  }
  if (fp.dc_offset != Complex{})
    for (auto& z : x) z += fp.dc_offset;
  if (fp.a1 != 1.0 || fp.a3 != 0.0 || fp.a5 != 0.0) {
    for (auto& z : x) {
      const double p = std::norm(z);
      z *= fp.a1 + fp.a3 * p + fp.a5 * p * p;
    }
  }
  if (fp.cfo != 0.0) {
    for (std::size_t n = 0; n < x.size(); ++n)
      x[n] *= std::polar(1.0, 2.0 * std::numbers::pi * fp.cfo * static_cast<double>(n));
  }
  if (fp.phase_noise_std > 0.0) {
    Rng rng(noise_seed);
    double theta = 0.0;
    for (auto& z : x) {
      theta += fp.phase_noise_std * rng.normal();
      z *= std::polar(1.0, theta);
    }
  }
  return out;
}

IQBurst add_awgn(const IQBurst& burst, double snr_db, std::uint64_t seed) {
  IQBurst out = burst;
  if (std::isinf(snr_db) && snr_db > 0) return out;
  const double noise_power = mean_power(burst.samples) / std::pow(10.0, snr_db / 10.0);
  const double sd = std::sqrt(noise_power / 2.0);
  Rng rng(seed);
  for (auto& z : out.samples) {
    const double re = rng.normal();
    const double im = rng.normal();
    z += Complex(sd * re, sd * im);
  }
  return out;
}

double occupied_bandwidth(std::span<const Complex> samples) {
  const std::size_t m = samples.size();
  if (m == 0) throw InvalidArgument("empty burst");
  const auto spectrum = fft(samples);
  std::vector<double> power(m);
  for (std::size_t i = 0; i < m; ++i) power[(i + m / 2) % m] = std::norm(spectrum[i]);
  const std::size_t w = std::max<std::size_t>(1, m / 128);
  std::vector<double> smooth(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t lo = i >= w / 2 ? i - w / 2 : 0;
    const std::size_t hi = std::min(m - 1, i + w / 2);
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += power[j];
    smooth[i] = acc / static_cast<double>(hi - lo + 1);
  }
  const double peak = *std::max_element(smooth.begin(), smooth.end());
  if (peak <= 0.0) throw InvalidArgument("zero-energy burst");
  const double threshold = peak * 1e-2;
  std::size_t lo = m, hi = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (smooth[i] >= threshold) {
      lo = std::min(lo, i);
      hi = std::max(hi, i);
    }
  }
  const double span = static_cast<double>(hi - lo + 1) - static_cast<double>(w - 1);
  return std::max(span, 1.0) / static_cast<double>(m);
}

IQBurst normalize_bandwidth(const IQBurst& burst, const BandwidthOptions& options) {
  if (mean_power(burst.samples) <= 0.0)
    throw InvalidArgument("cannot normalize the bandwidth of a zero-energy burst");
  if (!(options.target > 0.0 && options.target < 0.5))
    throw InvalidArgument("bandwidth target must be in (0, 0.5) cycles/sample");
  const std::size_t out_len = options.output_length.value_or(burst.size());
  if (out_len == 0 || out_len > burst.size())
    throw InvalidArgument("output length must be in [1, input length]");

  IQBurst out = burst;
  std::span<const Complex> head(burst.samples.data(), out_len);
  const double measured = occupied_bandwidth(head);
  if (within(measured, options.target, options.tolerance)) {
    out.samples.assign(head.begin(), head.end());
    return out;
  }

  double rate = options.target / measured;
  std::vector<Complex> best;
  double best_error = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < std::max<std::size_t>(options.iterations, 1); ++it) {
    auto candidate = resample(burst.samples, rate, out_len);
    if (mean_power(candidate) <= 0.0) break;
    const double w = occupied_bandwidth(candidate);
    const double error = std::abs(w / options.target - 1.0);
    if (error < best_error) {
      best_error = error;
      best = std::move(candidate);
    }
    if (error <= options.tolerance) break;
    rate *= options.target / w;
  }
  if (best.empty()) throw InvalidArgument("bandwidth normalization failed");
  scale_to_unit_power(best);
  out.samples = std::move(best);
  return out;
}

CaptureStream make_capture_stream(std::span<const IQBurst> bursts,
                                  std::span<const std::size_t> starts,
                                  std::size_t length, double snr_db, std::uint64_t seed) {
  if (bursts.size() != starts.size())
    throw InvalidArgument("one start index per burst is required");
  CaptureStream stream;
  stream.samples.assign(length, Complex{});
  double burst_power = 0.0;
  for (std::size_t i = 0; i < bursts.size(); ++i) {
    const auto& b = bursts[i];
    if (starts[i] + b.size() > length)
      throw InvalidArgument("burst " + std::to_string(i) + " overruns the stream");
    if (i > 0 && starts[i] < starts[i - 1] + 2 * bursts[i - 1].size())
      throw InvalidArgument("bursts must be separated by at least one burst length of silence");
    for (std::size_t n = 0; n < b.size(); ++n) stream.samples[starts[i] + n] += b.samples[n];
    burst_power = std::max(burst_power, mean_power(b.samples));
  }
  if (burst_power <= 0.0) burst_power = 1.0;
  const double sd = std::sqrt(burst_power / std::pow(10.0, snr_db / 10.0) / 2.0);
  Rng rng(seed);
  for (auto& z : stream.samples) {
    const double re = rng.normal();
    const double im = rng.normal();
    z += Complex(sd * re, sd * im);
  }
  stream.burst_starts.assign(starts.begin(), starts.end());
  return stream;
}

std::vector<std::size_t> detect_bursts(const CaptureStream& stream,
                                       const DetectorOptions& options) {
  const auto& x = stream.samples;
  const std::size_t w = std::max<std::size_t>(options.window, 1);
  std::vector<std::size_t> found;
  if (x.size() < w) return found;

  std::vector<double> avg(x.size() - w + 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < w; ++i) acc += std::norm(x[i]);
  avg[0] = acc / static_cast<double>(w);
  for (std::size_t i = w; i < x.size(); ++i) {
    acc += std::norm(x[i]) - std::norm(x[i - w]);
    avg[i - w + 1] = acc / static_cast<double>(w);
  }
  std::vector<double> sorted = avg;
  auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  const double floor = *mid;
  const double threshold = options.threshold_factor * floor;
  if (!(threshold > 0.0)) return found;

  std::size_t next_allowed = 0;
  for (std::size_t j = 1; j < avg.size(); ++j) {
    if (j + w - 1 < next_allowed) continue;
    if (avg[j] >= threshold && avg[j - 1] < threshold) {
      // Slow-rising envelopes cross late; walk back to the last window that
      // still looks like noise; the edge sits about half a window later.
      std::size_t quiet = j;
      while (quiet > 0 && avg[quiet] >= 2.0 * floor) --quiet;
      const std::size_t index = quiet + w / 2;
      found.push_back(index);
      next_allowed = index + options.holdoff;
    }
  }
  return found;
}

IQBurst extract_burst(const CaptureStream& stream, std::size_t index, std::size_t length) {
  if (index > stream.samples.size() || length > stream.samples.size() - index)
    throw InvalidArgument("fewer than " + std::to_string(length) +
                          " samples remain after index " + std::to_string(index));
  IQBurst b;
  b.sample_rate = stream.sample_rate;
  auto first = stream.samples.begin() + static_cast<std::ptrdiff_t>(index);
  b.samples.assign(first, first + static_cast<std::ptrdiff_t>(length));
  return b;
}

void stratified_split(std::span<const std::size_t> labels, std::size_t class_count,
                      double test_fraction, std::uint64_t seed,
                      std::vector<std::size_t>& train, std::vector<std::size_t>& test) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0))
    throw InvalidArgument("test fraction must be in [0, 1)");
  train.clear();
  test.clear();
  for (std::size_t c = 0; c < class_count; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) members.push_back(i);
    Rng rng(derive_seed(seed, {0x5b11U, c}));
    for (std::size_t i = members.size(); i > 1; --i)
      std::swap(members[i - 1], members[rng.below(i)]);
    const auto n_train = static_cast<std::size_t>(
        std::ceil((1.0 - test_fraction) * static_cast<double>(members.size()) - 1e-9));
    for (std::size_t i = 0; i < members.size(); ++i)
      (i < n_train ? train : test).push_back(members[i]);
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
}

Dataset make_sei_dataset(const SeiOptions& options) {
  if (options.n_devices < 2) throw InvalidArgument("SEI needs at least two devices");
  if (options.bursts_per_device == 0)
    throw InvalidArgument("bursts_per_device must be >= 1");
  constexpr std::size_t kMaxJitter = 8;
  const auto wifi = protocol_spec(ProtocolFamily::wifi_like);
  // The first 1600 samples (training fields) are identical for every burst.
  const IQBurst preamble =
      gen_protocol_burst(wifi, options.seed, options.burst_length + kMaxJitter);

  Dataset ds;
  for (std::size_t d = 0; d < options.n_devices; ++d) {
    char name[16];
    std::snprintf(name, sizeof name, "dev%02zu", d);
    ds.class_names.emplace_back(name);
  }
  for (std::size_t d = 0; d < options.n_devices; ++d) {
    const Fingerprint fp = draw_fingerprint(d, options.seed, options.spread);
    for (std::size_t i = 0; i < options.bursts_per_device; ++i) {
      Rng rng(derive_seed(options.seed, {0x5e1U, d, i}));
      const std::size_t jitter = rng.below(kMaxJitter);
      IQBurst b;
      b.sample_rate = kSampleRate;
      b.meta.label = ds.class_names[d];
      b.samples.assign(preamble.samples.begin() + static_cast<std::ptrdiff_t>(jitter),
                       preamble.samples.begin() +
                           static_cast<std::ptrdiff_t>(jitter + options.burst_length));
      Fingerprint burst_fp = fp;
      burst_fp.cfo += rng.uniform(-1.0, 1.0) * 0.02 * options.spread.cfo;
      b = apply_fingerprint(b, burst_fp, rng.bits());
      const Complex carrier = std::polar(1.0, rng.uniform(0.0, 2.0 * std::numbers::pi));
      for (auto& z : b.samples) z *= carrier;
      b = add_awgn(b, options.snr_db, rng.bits());
      quantize_float32(b);
      ds.bursts.push_back(std::move(b));
      ds.labels.push_back(d);
    }
  }
  stratified_split(ds.labels, ds.class_count(), options.test_fraction,
                   derive_seed(options.seed, {0x5911U}), ds.train_indices, ds.test_indices);
  ds.generator = {{"generator_version", kGeneratorVersion},
                  {"task", "sei"},
                  {"n_devices", options.n_devices},
                  {"bursts_per_device", options.bursts_per_device},
                  {"snr_db", options.snr_db},
                  {"seed", options.seed},
                  {"test_fraction", options.test_fraction},
                  {"burst_length", options.burst_length}};
  return ds;
}

Dataset make_sei_dataset(std::size_t n_devices, std::size_t bursts_per_device,
                         double snr_db, std::uint64_t seed) {
  SeiOptions o;
  o.n_devices = n_devices;
  o.bursts_per_device = bursts_per_device;
  o.snr_db = snr_db;
  o.seed = seed;
  return make_sei_dataset(o);
}

Dataset make_wiprec_dataset(const WiprecOptions& options) {
  if (options.bursts_per_class == 0) throw InvalidArgument("bursts_per_class must be >= 1");
  if (options.devices_per_class == 0) throw InvalidArgument("devices_per_class must be >= 1");
  const std::array<ProtocolFamily, 4> families = {
      ProtocolFamily::wifi_like, ProtocolFamily::bt_like, ProtocolFamily::zigbee_like,
      ProtocolFamily::nrf_like};

  Dataset ds;
  for (auto f : families) ds.class_names.emplace_back(to_string(f));

  FingerprintSpread device_spread;
  device_spread.iq_gain_imbalance_db *= 0.25;
  device_spread.iq_phase_skew *= 0.25;
  device_spread.dc_offset *= 0.25;
  device_spread.a3_center = 0.0;
  device_spread.a3 *= 0.25;
  device_spread.a5 *= 0.25;

  for (std::size_t c = 0; c < families.size(); ++c) {
    const auto spec = protocol_spec(families[c]);
    // Devices 0..n-2 share a manufacturer-level center, the last one does not.
    const Fingerprint common = draw_fingerprint(c * 1000, options.seed);
    const Fingerprint other = draw_fingerprint(c * 1000 + 1, options.seed);
    std::vector<Fingerprint> devices;
    for (std::size_t d = 0; d < options.devices_per_class; ++d) {
      const Fingerprint& center = d + 1 < options.devices_per_class ? common : other;
      const Fingerprint delta = draw_fingerprint(c * 1000 + 10 + d, options.seed, device_spread);
      Fingerprint fp = center;
      fp.device_id = c * 1000 + 10 + d;
      fp.iq_gain_imbalance_db += delta.iq_gain_imbalance_db;
      fp.iq_phase_skew += delta.iq_phase_skew;
      fp.dc_offset += delta.dc_offset;
      fp.cfo = delta.cfo;
      fp.a3 += delta.a3;
      fp.a5 += delta.a5;
      devices.push_back(fp);
    }

    const double expansion =
        options.bw_normalized ? std::max(1.0, options.bandwidth.target / spec.occupied_bandwidth) : 1.0;
    const auto gen_length =
        static_cast<std::size_t>(std::ceil(static_cast<double>(options.burst_length) * expansion * 1.5));

    for (std::size_t i = 0; i < options.bursts_per_class; ++i) {
      Rng rng(derive_seed(options.seed, {0x3a9U, c, i}));
      const auto& fp = devices[i % devices.size()];
      IQBurst b = gen_protocol_burst(spec, rng.bits(),
                                     options.bw_normalized ? gen_length : options.burst_length);
      b = apply_fingerprint(b, fp, rng.bits());
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double offset =
          rng.uniform(-1.0, 1.0) * options.residual_offset * spec.occupied_bandwidth;
      for (std::size_t n = 0; n < b.size(); ++n)
        b.samples[n] *= std::polar(1.0, phase + 2.0 * std::numbers::pi * offset * static_cast<double>(n));
      if (options.bw_normalized) {
        BandwidthOptions bw = options.bandwidth;
        bw.output_length = options.burst_length;
        b = normalize_bandwidth(b, bw);
      }
      const std::uint64_t noise_seed = rng.bits();
      if (!options.clean) b = add_awgn(b, options.snr_db, noise_seed);
      quantize_float32(b);
      b.meta.label = ds.class_names[c];
      ds.bursts.push_back(std::move(b));
      ds.labels.push_back(c);
    }
  }
  stratified_split(ds.labels, ds.class_count(), options.test_fraction,
                   derive_seed(options.seed, {0x5911U}), ds.train_indices, ds.test_indices);
  ds.generator = {{"generator_version", kGeneratorVersion},
                  {"task", "wiprec"},
                  {"bursts_per_class", options.bursts_per_class},
                  {"clean", options.clean},
                  {"snr_db", options.snr_db},
                  {"bw_normalized", options.bw_normalized},
                  {"bandwidth_target", options.bandwidth.target},
                  {"devices_per_class", options.devices_per_class},
                  {"residual_offset", options.residual_offset},
                  {"seed", options.seed},
                  {"test_fraction", options.test_fraction},
                  {"burst_length", options.burst_length}};
  return ds;
}

Dataset make_wiprec_dataset(std::size_t bursts_per_class, bool clean, bool bw_normalized,
                            std::uint64_t seed) {
  WiprecOptions o;
  o.bursts_per_class = bursts_per_class;
  o.clean = clean;
  o.bw_normalized = bw_normalized;
  o.seed = seed;
  return make_wiprec_dataset(o);
}

}  // namespace dlr::synthrf
