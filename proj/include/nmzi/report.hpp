#pragma once

// Run orchestration: execute a scenario end to end, write CSV/JSON artifacts,
// and assemble a provenance-stamped report.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nmzi/signal.hpp"
#include "nmzi/trace.hpp"
#include "nmzi/tsvf.hpp"

namespace nmzi {

inline constexpr const char* kVersion = "0.1.0";

enum class OutputFormat { kCsv, kJson };

struct WeakValueEntry {
  PathLabel mirror;
  std::optional<Complex> value;
  bool singular = false;
};

struct PeakEntry {
  PathLabel mirror;
  double frequency_hz = 0.0;
  double power = 0.0;      // periodogram bin value
  double amplitude = 0.0;  // sqrt(2 * power): sinusoid amplitude at that bin
};

struct RunReport {
  std::string scenario;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string version;

  Complex overlap{0.0, 0.0};
  double postselect_probability = 0.0;
  bool singular = false;
  bool dark = false;

  std::vector<WeakValueEntry> weak_values;
  std::vector<PeakEntry> peaks;
  std::map<PathLabel, double> trace_magnitudes;
  std::optional<double> excited_excited_magnitude;  // two-pointer runs

  std::string timeseries_csv;  // written file paths, empty when not produced
  std::string spectrum_csv;
};

// FNV-1a over the canonical serialized form.
std::uint64_t config_hash(const ScenarioConfig& config);

// Executes weak-value analysis, pointer traces, and signal synthesis as the
// configuration requires; writes artifacts under out_dir when non-empty.
RunReport run(const ScenarioConfig& config, const std::string& out_dir = "",
              std::uint64_t seed = 0);

std::string report_json(const RunReport& report);

struct SweepResult {
  std::string parameter;
  std::vector<double> values;
  std::vector<RunReport> reports;          // eta / kick sweeps
  std::vector<TraceSweepRow> trace_rows;   // epsilon sweeps
  std::string table_csv;                   // written table path, if any
};

// parameter is one of "epsilon", "eta", "kick"; one row per value, assembled
// in the order given.
SweepResult sweep(const ScenarioConfig& config, const std::string& parameter,
                  const std::vector<double>& values,
                  const std::string& out_dir = "", std::uint64_t seed = 0);

// Deterministic float formatting shared by every CSV writer.
std::string format_double(double value);

void write_timeseries_csv(const std::filesystem::path& path,
                          const DetectorRecord& record);
void write_spectrum_csv(const std::filesystem::path& path,
                        const PowerSpectrum& spectrum);
void write_trace_sweep_csv(const std::filesystem::path& path,
                           const std::vector<TraceSweepRow>& rows);

}  // namespace nmzi
