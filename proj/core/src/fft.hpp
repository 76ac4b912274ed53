#pragma once

#include <complex>
#include <span>
#include <vector>

namespace psi::detail {

// Unnormalised forward DFT: X[k] = sum_n x[n] exp(-2 pi i k n / N).
std::vector<std::complex<double>> fft(std::span<const std::complex<double>> input);

// Inverse DFT including the 1/N factor.
std::vector<std::complex<double>> ifft(std::span<const std::complex<double>> input);

}  // namespace psi::detail
