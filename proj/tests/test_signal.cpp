#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nmzi/report.hpp"
#include "nmzi/signal.hpp"
#include "oracles.hpp"

using namespace nmzi;

namespace {

// Compact run parameters for the unit suite: 1024 samples, frequencies on the
// 4 Hz grid of a quarter-second record.
ScenarioConfig small_config() {
  ScenarioConfig config;
  config.name = "unit";
  config.run.duration_s = 0.25;
  config.run.sample_rate_hz = 4096.0;
  return config;
}

const std::map<PathLabel, double> kSmallFrequencies = {
    {"A", 300.0}, {"B", 284.0}, {"C", 316.0}, {"E", 336.0}, {"F", 348.0}};

ScenarioConfig small_fig2b(double kick = 0.005) {
  ScenarioConfig config = small_config();
  for (const auto& [mirror, freq] : kSmallFrequencies) {
    config.vibrations[mirror] = VibrationSpec{freq, kick, 0.0};
  }
  return config;
}

double peak_power(const PowerSpectrum& spectrum, double freq) {
  return spectrum.at_frequency(freq);
}

}  // namespace

TEST_CASE("periodogram: bin-aligned sinusoid gives a single a^2/2 peak") {
  const double rate = 1024.0;
  const double freq = 48.0;
  const double amp = 0.37;
  std::vector<double> samples(1024);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i] = amp * std::sin(2.0 * std::numbers::pi * freq *
                                static_cast<double>(i) / rate);
  }
  const auto spectrum = periodogram(samples, rate);
  CHECK(spectrum.at_frequency(freq) ==
        doctest::Approx(amp * amp / 2.0).epsilon(1e-12));
  for (std::size_t m = 0; m < spectrum.power.size(); ++m) {
    if (spectrum.frequency(m) == freq) continue;
    CHECK(spectrum.power[m] < 1e-20);
  }
}

TEST_CASE("periodogram satisfies Parseval's identity") {
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> samples(512);
  for (auto& s : samples) s = gauss(rng);
  const auto spectrum = periodogram(samples, 512.0);
  double total = 0.0;
  for (const double p : spectrum.power) total += p;
  double mean_square = 0.0;
  for (const double s : samples) mean_square += s * s;
  mean_square /= static_cast<double>(samples.size());
  CHECK(total == doctest::Approx(mean_square).epsilon(1e-9));
}

TEST_CASE("periodogram handles padding, windows, and empty input") {
  std::vector<double> samples(300, 1.0);
  const auto padded = periodogram(samples, 300.0);
  CHECK(padded.power.size() == 257);  // padded to 512
  const auto hann = periodogram(samples, 300.0, SpectralWindow::kHann);
  for (const double p : hann.power) CHECK(p >= 0.0);
  CHECK_THROWS_AS(periodogram({}, 100.0), std::invalid_argument);
}

TEST_CASE("quad gain approaches 2/sqrt(pi) as the grid refines") {
  const double continuum = 2.0 / std::sqrt(std::numbers::pi);
  TransverseGrid fine;
  fine.points = 1024;
  fine.half_width = 24.0;
  const double g_fine = quad_gain(fine);
  CHECK(std::abs(g_fine - continuum) / continuum < 5e-3);
  // the default grid carries a few-percent quadrature offset, absorbed into
  // the predictor by construction
  const double g_default = quad_gain(TransverseGrid{});
  CHECK(std::abs(g_default - continuum) / continuum < 0.06);
}

TEST_CASE("still mirrors: no quad signal and constant detected power") {
  ScenarioConfig config = small_fig2b(0.0);
  const auto result = synthesize(config);
  CHECK_FALSE(result.record.dark);
  for (const double q : result.record.quad_diff) CHECK(std::abs(q) < 1e-15);
  for (const double p : result.record.total_power) {
    CHECK(p == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
  }
}

TEST_CASE("every sample conserves energy across ports and blocks") {
  ScenarioConfig config = small_fig2b();
  const auto open = synthesize(config);
  CHECK(open.energy_residual_max < 1e-12);

  config.blocks = {"B"};
  const auto blocked = synthesize(config);
  CHECK(blocked.energy_residual_max < 1e-12);
  CHECK(blocked.mean_absorbed == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("five vibrating mirrors: peaks at A, B, C only") {
  const auto result = synthesize(small_fig2b());
  const auto spectrum = power_spectrum(result.record);

  const double pa = peak_power(spectrum, kSmallFrequencies.at("A"));
  const double pb = peak_power(spectrum, kSmallFrequencies.at("B"));
  const double pc = peak_power(spectrum, kSmallFrequencies.at("C"));
  const double pe = peak_power(spectrum, kSmallFrequencies.at("E"));
  const double pf = peak_power(spectrum, kSmallFrequencies.at("F"));

  // equal |weak values| = equal peaks
  CHECK(pa / pc == doctest::Approx(1.0).epsilon(0.02));
  CHECK(pb / pc == doctest::Approx(1.0).epsilon(0.02));
  // no trace of E and F at first order
  CHECK(pe < 1e-10 * pc);
  CHECK(pf < 1e-10 * pc);

  // absolute scale against the first-order oracle
  const double gain = quad_gain(ScenarioConfig{}.run.grid);
  const double expected = std::pow(gain * (1.0 / 9.0) * 0.005, 2.0) / 2.0;
  CHECK(pc == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("peaks respond only to their own mirror") {
  // weak couplings so that cross terms sit below the 1e-9 comparison level
  ScenarioConfig all = small_fig2b(1e-5);
  ScenarioConfig only_a = small_config();
  only_a.vibrations["A"] = all.vibrations["A"];

  const auto spectrum_all = power_spectrum(synthesize(all).record);
  const auto spectrum_a = power_spectrum(synthesize(only_a).record);
  const double fa = kSmallFrequencies.at("A");
  CHECK(peak_power(spectrum_all, fa) ==
        doctest::Approx(peak_power(spectrum_a, fa)).epsilon(1e-9));
}

TEST_CASE("blocking C at ideal alignment darkens the record entirely") {
  ScenarioConfig config = small_fig2b();
  config.blocks = {"C"};
  const auto result = synthesize(config);
  CHECK(result.record.dark);
  CHECK(result.bare_postselect_probability == 0.0);
  for (const double p : result.record.total_power) CHECK(p == 0.0);
  for (const double q : result.record.quad_diff) CHECK(q == 0.0);
  const auto spectrum = power_spectrum(result.record);
  for (const double p : spectrum.power) CHECK(p < 1e-20);
}

TEST_CASE("blocked C with misalignment: peak amplitudes scale like eta^2") {
  auto amp_at = [&](double eta, const PathLabel& mirror) {
    ScenarioConfig config = small_fig2b();
    config.blocks = {"C"};
    config.alignment_eta = eta;
    const auto result = synthesize(config);
    CHECK_FALSE(result.record.dark);
    const auto spectrum = power_spectrum(result.record);
    return std::sqrt(2.0 * peak_power(spectrum, kSmallFrequencies.at(mirror)));
  };
  for (const PathLabel mirror : {"A", "B"}) {
    const double a1 = amp_at(4e-3, mirror);
    const double a2 = amp_at(8e-3, mirror);
    const double expected = (1.0 - std::cos(8e-3)) / (1.0 - std::cos(4e-3));
    CAPTURE(mirror);
    CHECK(a2 / a1 == doctest::Approx(expected).epsilon(0.05));
  }
}

TEST_CASE("common-mode vibration of A and B cancels exactly") {
  ScenarioConfig config = small_config();
  const double f = 300.0;
  config.vibrations["A"] = VibrationSpec{f, 0.005, 0.0};
  config.vibrations["B"] = VibrationSpec{f, 0.005, 0.0};
  const auto result = synthesize(config);
  const auto spectrum = power_spectrum(result.record);

  ScenarioConfig single = small_config();
  single.vibrations["A"] = VibrationSpec{f, 0.005, 0.0};
  const auto single_spectrum = power_spectrum(synthesize(single).record);

  CHECK(spectrum.at_frequency(f) < 1e-10 * single_spectrum.at_frequency(f));
}

TEST_CASE("first-order prediction: single mirror, opposite signs, null at E") {
  ScenarioConfig only_a = small_config();
  only_a.vibrations["A"] = VibrationSpec{300.0, 0.004, 0.0};
  const double gain = quad_gain(only_a.run.grid);
  const double t = 1.0 / 1200.0;  // quarter period: sin = 1
  CHECK(first_order_signal(only_a, t) ==
        doctest::Approx(gain * (1.0 / 9.0) * 0.004).epsilon(1e-9));

  ScenarioConfig common = small_config();
  common.vibrations["A"] = VibrationSpec{300.0, 0.004, 0.0};
  common.vibrations["B"] = VibrationSpec{300.0, 0.004, 0.0};
  CHECK(std::abs(first_order_signal(common, t)) < 1e-15);

  ScenarioConfig only_e = small_config();
  only_e.vibrations["E"] = VibrationSpec{336.0, 0.004, 0.0};
  for (const double tt : {0.01, 0.02, 0.11}) {
    CHECK(std::abs(first_order_signal(only_e, tt)) < 1e-15);
  }
}

TEST_CASE("first-order prediction is undefined for singular post-selection") {
  ScenarioConfig config = small_fig2b();
  config.blocks = {"C"};
  CHECK_THROWS_AS(first_order_signal(config, 0.0), std::runtime_error);
}

TEST_CASE("full model tracks the first-order prediction in the weak regime") {
  ScenarioConfig config = small_fig2b(0.005);
  const auto result = synthesize(config);
  const auto model_peaks = power_spectrum(result.record);
  const double gain = quad_gain(config.run.grid);
  for (const auto& [mirror, vib] : config.vibrations) {
    const double measured = std::sqrt(2.0 * peak_power(model_peaks, vib.frequency_hz));
    double weak = 0.0;
    if (mirror == "A" || mirror == "C") weak = 1.0;
    if (mirror == "B") weak = -1.0;
    const double predicted = gain * (1.0 / 9.0) * std::abs(weak) * vib.kick;
    if (predicted > 0.0) {
      CAPTURE(mirror);
      CHECK(measured == doctest::Approx(predicted).epsilon(0.05));
    }
  }
}

TEST_CASE("linearization error shrinks quadratically with the kick") {
  ScenarioConfig config = small_fig2b();
  const std::vector<double> levels = {0.008, 0.004, 0.002};
  const auto rows = convergence_check(config, levels);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) CHECK(row.discrepancy > 0.0);
  // third-order remainder: halving the kick quarters the normalized residual
  const double r1 = rows[1].discrepancy / rows[0].discrepancy;
  const double r2 = rows[2].discrepancy / rows[1].discrepancy;
  CHECK(r1 == doctest::Approx(0.25).epsilon(0.05));
  CHECK(r2 == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("convergence check validates its inputs") {
  ScenarioConfig config = small_fig2b();
  CHECK_THROWS_AS(convergence_check(config, {0.01, 0.005}), std::invalid_argument);
  CHECK_THROWS_AS(convergence_check(config, {0.005, 0.01, 0.0025}),
                  std::invalid_argument);
  ScenarioConfig still = small_config();
  CHECK_THROWS_AS(convergence_check(still, {0.01, 0.005, 0.0025}),
                  std::invalid_argument);
}

TEST_CASE("synthesis is deterministic, with and without shot noise") {
  ScenarioConfig config = small_fig2b();
  const auto a = synthesize(config);
  const auto b = synthesize(config);
  CHECK(a.record.quad_diff == b.record.quad_diff);
  CHECK(a.record.total_power == b.record.total_power);

  config.noise = NoiseSpec{42, 1e9};
  const auto n1 = synthesize(config);
  const auto n2 = synthesize(config);
  CHECK(n1.record.quad_diff == n2.record.quad_diff);

  config.noise->seed = 43;
  const auto n3 = synthesize(config);
  CHECK(n1.record.quad_diff != n3.record.quad_diff);
}

TEST_CASE("shot noise stays near the deterministic record at high budget") {
  ScenarioConfig config = small_fig2b();
  const auto clean = synthesize(config);
  config.noise = NoiseSpec{7, 1e12};
  const auto noisy = synthesize(config);
  double max_diff = 0.0;
  for (std::size_t i = 0; i < clean.record.total_power.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(clean.record.total_power[i] -
                                           noisy.record.total_power[i]));
  }
  CHECK(max_diff < 1e-4);
}
