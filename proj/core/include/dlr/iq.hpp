#pragma once

#include <complex>
#include <string>
#include <vector>

namespace dlr {

using Complex = std::complex<double>;

struct BurstMeta {
  double center_frequency = 0.0;  ///< Hz
  std::string label;
};

/// Fixed-length complex baseband burst (I + jQ).
struct IQBurst {
  std::vector<Complex> samples;
  double sample_rate = 100e6;  ///< Hz
  BurstMeta meta;

  [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
};

}  // namespace dlr
