#include "nmzi/signal.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "nmzi/tsvf.hpp"

namespace nmzi {

namespace {

struct GridWorkspace {
  int n = 0;
  double dx = 0.0;
  double dk = 0.0;
  std::vector<double> x;
  std::vector<double> k;      // FFT bin ordering
  std::vector<double> sign;   // quad-cell half assignment per bin (0 at DC/Nyquist)
  Eigen::VectorXcd psi0;      // discretely normalized Gaussian

  explicit GridWorkspace(const TransverseGrid& grid) {
    n = grid.points;
    dx = grid.dx();
    dk = 2.0 * std::numbers::pi / (n * dx);
    x.resize(n);
    k.resize(n);
    sign.resize(n);
    for (int j = 0; j < n; ++j) {
      x[j] = -grid.half_width + j * dx;
    }
    for (int m = 0; m < n; ++m) {
      const int folded = m <= n / 2 ? m : m - n;
      k[m] = folded * dk;
      if (m == 0 || m == n / 2) {
        sign[m] = 0.0;
      } else {
        sign[m] = folded > 0 ? 1.0 : -1.0;
      }
    }
    psi0.resize(n);
    const double w = grid.waist;
    for (int j = 0; j < n; ++j) {
      psi0(j) = std::exp(-x[j] * x[j] / (2.0 * w * w));
    }
    psi0 /= std::sqrt(psi0.squaredNorm() * dx);
  }
};

struct FirstOrderTerm {
  double coefficient = 0.0;  // G * Re[(P_m)_w] * kick_m
  double omega = 0.0;
  double phase = 0.0;
};

// Shared by first_order_signal and convergence_check: the weak values are
// kick-independent, so the model is assembled once per configuration.
std::vector<FirstOrderTerm> first_order_model(const ScenarioConfig& config) {
  const OpticalNetwork net = build_nested_network(config);
  const PathLabel port = net.detector_port();
  std::vector<FirstOrderTerm> terms;
  double gain_times_prob = 0.0;
  bool have_gain = false;
  for (const auto& [mirror, vib] : config.vibrations) {
    const WeakValueReport report = mirror_weak_value(net, mirror, port);
    if (report.singular) {
      throw std::runtime_error(
          "first-order predictor undefined: singular post-selection");
    }
    if (!have_gain) {
      gain_times_prob = quad_gain(config.run.grid) * std::norm(report.overlap);
      have_gain = true;
    }
    FirstOrderTerm term;
    term.coefficient = gain_times_prob * report.value->real() * vib.kick;
    term.omega = 2.0 * std::numbers::pi * vib.frequency_hz;
    term.phase = vib.phase;
    terms.push_back(term);
  }
  if (!have_gain) {
    // No vibrations: the predictor is identically zero, but a singular
    // post-selection must still be reported.
    const int final_slice = net.slice_count() - 1;
    const auto report =
        weak_value(net, ProjectorExpr::path(port, final_slice), port);
    if (report.singular) {
      throw std::runtime_error(
          "first-order predictor undefined: singular post-selection");
    }
  }
  return terms;
}

double eval_first_order(const std::vector<FirstOrderTerm>& terms, double t) {
  double sum = 0.0;
  for (const auto& term : terms) {
    sum += term.coefficient * std::sin(term.omega * t + term.phase);
  }
  return sum;
}

}  // namespace

double quad_gain(const TransverseGrid& grid) {
  const GridWorkspace ws(grid);
  const double w = grid.waist;
  double gain = 0.0;
  for (int m = 0; m < ws.n; ++m) {
    const double km = ws.k[m];
    gain += ws.sign[m] * (2.0 * w * w * km / std::sqrt(std::numbers::pi)) *
            std::exp(-w * w * km * km) * ws.dk;
  }
  return gain;
}

SynthesisResult synthesize(const ScenarioConfig& config) {
  validate_config(config);
  const OpticalNetwork net = build_nested_network(config);
  const PathLabel port = net.detector_port();
  const int final_slice = net.slice_count() - 1;

  const auto n_samples = static_cast<std::size_t>(
      std::llround(config.run.duration_s * config.run.sample_rate_hz));

  SynthesisResult result;
  result.record.sample_rate_hz = config.run.sample_rate_hz;

  // The photon-level channel decides whether the record is dark: when the
  // post-selected amplitude of the bare network vanishes identically there is
  // nothing to detect and the record is flagged instead of synthesized.
  const auto bare =
      weak_value(net, ProjectorExpr::path(port, final_slice), port);
  result.bare_postselect_probability = std::norm(bare.overlap);
  if (bare.singular) {
    result.record.dark = true;
    result.record.quad_diff.assign(n_samples, 0.0);
    result.record.total_power.assign(n_samples, 0.0);
    return result;
  }

  const GridWorkspace ws(config.run.grid);
  const double w = config.run.grid.waist;

  // vibrating mirrors grouped by coupling slice
  struct Kick {
    int row = 0;
    double kick_over_w = 0.0;
    double omega = 0.0;
    double phase = 0.0;
  };
  std::map<int, std::vector<Kick>> kicks_by_slice;
  for (const auto& [mirror, vib] : config.vibrations) {
    if (vib.kick == 0.0) continue;
    const auto& info = net.mirror(mirror);
    Kick kick;
    kick.row = net.label_index(info.slice, info.path);
    kick.kick_over_w = vib.kick / w;
    kick.omega = 2.0 * std::numbers::pi * vib.frequency_hz;
    kick.phase = vib.phase;
    kicks_by_slice[info.slice].push_back(kick);
  }

  std::optional<std::mt19937_64> rng;
  double photon_budget = 0.0;
  if (config.noise) {
    rng.emplace(config.noise->seed);
    photon_budget = config.noise->photon_budget;
  }

  result.record.quad_diff.reserve(n_samples);
  result.record.total_power.reserve(n_samples);

  const auto& final_labels = net.slice_labels(final_slice);
  std::map<PathLabel, double> port_power_sums;
  for (const auto& l : final_labels) port_power_sums[l] = 0.0;
  double absorbed_sum = 0.0;

  std::vector<std::complex<double>> spectrum_buf(static_cast<std::size_t>(ws.n));
  const double bin_power_scale = ws.dx * ws.dx * ws.dk /
                                 (2.0 * std::numbers::pi);
  const int port_row = net.label_index(final_slice, port);

  for (std::size_t i = 0; i < n_samples; ++i) {
    const double t = static_cast<double>(i) / config.run.sample_rate_hz;

    Eigen::MatrixXcd fields = Eigen::MatrixXcd::Zero(
        static_cast<Eigen::Index>(net.slice_labels(0).size()), ws.n);
    fields.row(0) = ws.psi0.transpose();
    double absorbed = 0.0;
    net.project_blocked(0, fields, ws.dx, &absorbed);
    for (int s = 0; s < net.stage_count(); ++s) {
      auto it = kicks_by_slice.find(s);
      if (it != kicks_by_slice.end()) {
        for (const auto& kick : it->second) {
          const double kappa =
              kick.kick_over_w * std::sin(kick.omega * t + kick.phase);
          for (int j = 0; j < ws.n; ++j) {
            fields(kick.row, j) *= std::polar(1.0, kappa * ws.x[static_cast<std::size_t>(j)]);
          }
        }
      }
      fields = net.apply_stage(s, fields, ws.dx, &absorbed);
    }

    double input_power_check = absorbed;
    for (Eigen::Index r = 0; r < fields.rows(); ++r) {
      const double p = fields.row(r).squaredNorm() * ws.dx;
      port_power_sums[final_labels[static_cast<std::size_t>(r)]] += p;
      input_power_check += p;
    }
    absorbed_sum += absorbed;
    result.energy_residual_max =
        std::max(result.energy_residual_max, std::abs(input_power_check - 1.0));

    // far field of the detector port
    for (int j = 0; j < ws.n; ++j) {
      spectrum_buf[static_cast<std::size_t>(j)] = fields(port_row, j);
    }
    fft_radix2(spectrum_buf);
    double quad = 0.0;
    double plus = 0.0, minus = 0.0;
    for (int m = 0; m < ws.n; ++m) {
      const double p = std::norm(spectrum_buf[static_cast<std::size_t>(m)]) *
                       bin_power_scale;
      if (ws.sign[m] > 0.0) {
        plus += p;
      } else if (ws.sign[m] < 0.0) {
        minus += p;
      }
    }
    quad = plus - minus;
    double total = fields.row(port_row).squaredNorm() * ws.dx;

    if (rng) {
      auto draw = [&](double mean) -> double {
        if (!(mean > 0.0)) return 0.0;
        std::poisson_distribution<long long> d(mean);
        return static_cast<double>(d(*rng));
      };
      const double nplus = draw(photon_budget * plus);
      const double nminus = draw(photon_budget * minus);
      const double nrest = draw(photon_budget * (total - plus - minus));
      quad = (nplus - nminus) / photon_budget;
      total = (nplus + nminus + nrest) / photon_budget;
    }

    result.record.quad_diff.push_back(quad);
    result.record.total_power.push_back(total);
  }

  for (auto& [label, sum] : port_power_sums) {
    result.mean_port_power[label] = sum / static_cast<double>(n_samples);
  }
  result.mean_absorbed = absorbed_sum / static_cast<double>(n_samples);
  return result;
}

double first_order_signal(const ScenarioConfig& config, double t_seconds) {
  return eval_first_order(first_order_model(config), t_seconds);
}

PowerSpectrum power_spectrum(const DetectorRecord& record,
                             SpectralWindow window) {
  if (record.quad_diff.empty()) throw std::invalid_argument("empty record");
  return periodogram(record.quad_diff, record.sample_rate_hz, window);
}

std::vector<ConvergenceRow> convergence_check(
    const ScenarioConfig& config, const std::vector<double>& kick_levels) {
  if (kick_levels.size() < 3) {
    throw std::invalid_argument("convergence check needs at least 3 levels");
  }
  for (std::size_t i = 1; i < kick_levels.size(); ++i) {
    if (!(kick_levels[i] < kick_levels[i - 1])) {
      throw std::invalid_argument("kick levels must decrease");
    }
  }
  double max_kick = 0.0;
  for (const auto& [mirror, vib] : config.vibrations) {
    (void)mirror;
    max_kick = std::max(max_kick, vib.kick);
  }
  if (max_kick == 0.0) {
    throw std::invalid_argument("convergence check needs a vibrating mirror");
  }

  std::vector<ConvergenceRow> rows;
  for (const double level : kick_levels) {
    ConvergenceRow row;
    row.kick = level;
    if (level == 0.0) {
      rows.push_back(row);
      continue;
    }
    ScenarioConfig scaled = config;
    const double scale = level / max_kick;
    for (auto& [mirror, vib] : scaled.vibrations) {
      (void)mirror;
      vib.kick *= scale;
    }
    const auto result = synthesize(scaled);
    const auto model = first_order_model(scaled);
    double max_abs = 0.0;
    for (std::size_t i = 0; i < result.record.quad_diff.size(); ++i) {
      const double t = static_cast<double>(i) / scaled.run.sample_rate_hz;
      max_abs = std::max(max_abs, std::abs(result.record.quad_diff[i] -
                                           eval_first_order(model, t)));
    }
    row.discrepancy = max_abs / level;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace nmzi
