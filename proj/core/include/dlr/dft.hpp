#pragma once

#include <complex>
#include <span>
#include <vector>

namespace dlr {

using Complex = std::complex<double>;

/// Forward DFT, X[m] = sum_n x[n] e^{-i 2 pi m n / L}, unscaled.
[[nodiscard]] std::vector<Complex> fft(std::span<const Complex> x);

/// Inverse DFT, x[n] = sum_m X[m] e^{+i 2 pi m n / L}, unscaled.
[[nodiscard]] std::vector<Complex> ifft(std::span<const Complex> x);

}  // namespace dlr
