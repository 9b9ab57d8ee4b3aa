#pragma once

// Radix-2 FFT and one-sided periodograms built directly on the transform
// definition: deterministic, dependency-free, bit-reproducible for a fixed
// input.

#include <complex>
#include <cstddef>
#include <map>
#include <vector>

namespace nmzi {

bool is_power_of_two(std::size_t n);

// In-place iterative radix-2 transform; size must be a power of two.
// Forward: X_k = sum_j x_j exp(-2*pi*i*j*k/N). Inverse includes the 1/N factor.
void fft_radix2(std::vector<std::complex<double>>& data, bool inverse = false);

enum class SpectralWindow { kRectangular, kHann };

// One-sided power spectrum: bin m holds the power of frequency m * bin_hz,
// m = 0 .. N/2. With the rectangular window a bin-aligned sinusoid of
// amplitude a yields a single bin of power a^2/2, and the bins sum to the mean
// square of the samples (Parseval).
struct PowerSpectrum {
  double bin_hz = 0.0;
  std::vector<double> power;

  double frequency(std::size_t bin) const { return bin_hz * static_cast<double>(bin); }
  // Power at an exactly bin-aligned frequency; throws for off-grid values.
  double at_frequency(double frequency_hz, double tol = 1e-6) const;
};

PowerSpectrum periodogram(const std::vector<double>& samples,
                          double sample_rate_hz,
                          SpectralWindow window = SpectralWindow::kRectangular);

}  // namespace nmzi
