#pragma once

#include <complex>
#include <vector>

namespace ounts {

// In-place radix-2 decimation-in-time FFT, X_k = sum_j x_j exp(-2 pi i j k / N).
// The length must be a power of two.
void fft(std::vector<std::complex<double>>& data);

}  // namespace ounts
