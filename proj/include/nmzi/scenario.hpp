#pragma once

// Declarative experiment descriptions: splitter ratios, alignment, blocks,
// mirror vibrations, pointer couplings, and run parameters, with strict JSON
// ingestion and a catalog of built-in scenarios.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nmzi/network.hpp"
#include "nmzi/trace.hpp"

namespace nmzi {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kSchemaVersion = 1;

// Uniform transverse grid x in [-half_width, half_width) with `points`
// samples; the beam is a Gaussian of the given waist.
struct TransverseGrid {
  int points = 256;
  double half_width = 6.0;
  double waist = 1.0;

  double dx() const { return 2.0 * half_width / points; }
};

struct RunParams {
  double duration_s = 1.0;
  double sample_rate_hz = 8192.0;
  TransverseGrid grid;
};

// Optional Poisson shot noise on the detected power; off unless present.
struct NoiseSpec {
  std::uint64_t seed = 0;
  double photon_budget = 0.0;  // expected detected photons per unit power
};

struct SplitterRatios {
  double outer = 2.0 / 3.0;  // power sent to the inner arm by each outer splitter
  double inner = 0.5;
};

struct ScenarioConfig {
  std::string name = "custom";
  SplitterRatios splitters;
  double alignment_eta = 0.0;
  std::vector<PathLabel> blocks;
  std::map<PathLabel, VibrationSpec> vibrations;  // keyed by mirror label
  std::vector<PointerSpec> pointers;
  RunParams run;
  std::optional<NoiseSpec> noise;
};

// Strict parse: unknown fields and schema mismatches are rejected.
ScenarioConfig parse_config(const std::string& json_text);
std::string serialize_config(const ScenarioConfig& config);

// Field-level validation (ratios, frequencies distinct and bin-aligned,
// coupling ranges, grid resolution). Throws ConfigError.
void validate_config(const ScenarioConfig& config);

// Built-in catalog: fig2b, fig2c, salih, leakage_sweep, paradox, trace_sweep.
ScenarioConfig builtin_scenario(const std::string& name);
std::vector<std::pair<std::string, std::string>> builtin_scenarios();

NestedGeometry geometry_of(const ScenarioConfig& config);

inline OpticalNetwork build_nested_network(const ScenarioConfig& config) {
  return build_nested_network(geometry_of(config));
}

}  // namespace nmzi
