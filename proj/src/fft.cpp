#include "nmzi/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nmzi {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("fft size must be a power of two");
  }
  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen = std::polar(1.0, angle);
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w{1.0, 0.0};
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = data[i + j];
        const std::complex<double> v = data[i + j + len / 2] * w;
        data[i + j] = u + v;
        data[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : data) x *= scale;
  }
}

double PowerSpectrum::at_frequency(double frequency_hz, double tol) const {
  const double bins = frequency_hz / bin_hz;
  const double rounded = std::round(bins);
  if (std::abs(bins - rounded) > tol) {
    throw std::invalid_argument("frequency is not bin-aligned");
  }
  const auto bin = static_cast<std::size_t>(rounded);
  if (rounded < 0.0 || bin >= power.size()) {
    throw std::invalid_argument("frequency outside the spectrum range");
  }
  return power[bin];
}

PowerSpectrum periodogram(const std::vector<double>& samples,
                          double sample_rate_hz, SpectralWindow window) {
  if (samples.empty()) throw std::invalid_argument("empty record");
  if (!(sample_rate_hz > 0.0)) {
    throw std::invalid_argument("sample rate must be positive");
  }
  std::size_t n = samples.size();
  if (!is_power_of_two(n)) {
    std::size_t padded = 1;
    while (padded < n) padded <<= 1;
    n = padded;
  }
  std::vector<std::complex<double>> data(n, {0.0, 0.0});
  for (std::size_t j = 0; j < samples.size(); ++j) {
    double w = 1.0;
    if (window == SpectralWindow::kHann) {
      w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(j) /
                               static_cast<double>(samples.size()));
    }
    data[j] = {samples[j] * w, 0.0};
  }
  fft_radix2(data);
  PowerSpectrum spectrum;
  spectrum.bin_hz = sample_rate_hz / static_cast<double>(n);
  const double nn = static_cast<double>(n) * static_cast<double>(n);
  spectrum.power.resize(n / 2 + 1);
  for (std::size_t m = 0; m <= n / 2; ++m) {
    const double doubling = (m == 0 || m == n / 2) ? 1.0 : 2.0;
    spectrum.power[m] = doubling * std::norm(data[m]) / nn;
  }
  return spectrum;
}

}  // namespace nmzi
