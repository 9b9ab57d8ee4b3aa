#pragma once

// Quad-cell detector signal from vibrating mirrors.
//
// Each path carries a Gaussian transverse profile on a uniform grid. A
// vibrating mirror imprints the phase exp(i*kappa(t)*x) on its path; the
// fields propagate through the network without diffraction, and the quad cell
// reads the far field of the detector port: quad_diff is the power difference
// between the positive- and negative-momentum halves, i.e. the beam
// deflection a downstream split detector sees.

#include <map>
#include <vector>

#include "nmzi/fft.hpp"
#include "nmzi/scenario.hpp"

namespace nmzi {

struct DetectorRecord {
  double sample_rate_hz = 0.0;
  std::vector<double> quad_diff;
  std::vector<double> total_power;
  // True when the bare post-selected channel carries exactly zero amplitude
  // (formally impossible post-selection): the record is identically zero.
  bool dark = false;
};

struct SynthesisResult {
  DetectorRecord record;
  double bare_postselect_probability = 0.0;
  // Max over samples of |detected + dark ports + absorbed - input|; zero for
  // dark records (nothing synthesized).
  double energy_residual_max = 0.0;
  std::map<PathLabel, double> mean_port_power;
  double mean_absorbed = 0.0;
};

SynthesisResult synthesize(const ScenarioConfig& config);

// d(quad_diff)/d(kick) per unit detected power for the reference Gaussian,
// evaluated with the same grid quadrature the detector uses. Continuum limit
// 2/sqrt(pi), independent of the waist.
double quad_gain(const TransverseGrid& grid);

// First-order prediction: quad_diff(t) = G * sum_m Re[(P_m)_w] * kick_m *
// sin(2*pi*f_m*t + phase_m) with G = quad_gain * bare post-selection
// probability. Throws std::runtime_error when the overlap is singular.
double first_order_signal(const ScenarioConfig& config, double t_seconds);

PowerSpectrum power_spectrum(const DetectorRecord& record,
                             SpectralWindow window = SpectralWindow::kRectangular);

struct ConvergenceRow {
  double kick = 0.0;           // common kick level
  double discrepancy = 0.0;    // max_t |full - first_order| / kick
};

// Scales every configured vibration so the largest kick equals each level and
// compares the full synthesis against the first-order prediction.
std::vector<ConvergenceRow> convergence_check(const ScenarioConfig& config,
                                              const std::vector<double>& kick_levels);

}  // namespace nmzi
