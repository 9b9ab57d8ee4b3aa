#include "nmzi/report.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace nmzi {

namespace {

using nlohmann::json;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  out << text;
}

json complex_json(const Complex& z) {
  return json{{"re", z.real()}, {"im", z.imag()}};
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::uint64_t config_hash(const ScenarioConfig& config) {
  const std::string text = serialize_config(config);
  std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a 64
  for (const unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

void write_timeseries_csv(const std::filesystem::path& path,
                          const DetectorRecord& record) {
  std::string text = "t,quad_diff,total_power\n";
  for (std::size_t i = 0; i < record.quad_diff.size(); ++i) {
    const double t = static_cast<double>(i) / record.sample_rate_hz;
    text += format_double(t);
    text += ',';
    text += format_double(record.quad_diff[i]);
    text += ',';
    text += format_double(record.total_power[i]);
    text += '\n';
  }
  write_text(path, text);
}

void write_spectrum_csv(const std::filesystem::path& path,
                        const PowerSpectrum& spectrum) {
  std::string text = "freq_hz,power\n";
  for (std::size_t m = 0; m < spectrum.power.size(); ++m) {
    text += format_double(spectrum.frequency(m));
    text += ',';
    text += format_double(spectrum.power[m]);
    text += '\n';
  }
  write_text(path, text);
}

void write_trace_sweep_csv(const std::filesystem::path& path,
                           const std::vector<TraceSweepRow>& rows) {
  std::string text = "epsilon,mag_A,mag_B,mag_C,mag_E,mag_F,ratio_EF_to_AB\n";
  for (const auto& row : rows) {
    text += format_double(row.epsilon);
    for (const double mag : {row.mag_A, row.mag_B, row.mag_C, row.mag_E, row.mag_F}) {
      text += ',';
      text += format_double(mag);
    }
    text += ',';
    if (row.ratio_EF_to_AB) text += format_double(*row.ratio_EF_to_AB);
    text += '\n';
  }
  write_text(path, text);
}

RunReport run(const ScenarioConfig& config, const std::string& out_dir,
              std::uint64_t seed) {
  validate_config(config);
  RunReport report;
  report.scenario = config.name;
  report.config_hash = config_hash(config);
  report.seed = seed;
  report.version = kVersion;

  ScenarioConfig effective = config;
  if (effective.noise) effective.noise->seed = seed;

  const OpticalNetwork net = build_nested_network(effective);
  const PathLabel port = net.detector_port();
  const int final_slice = net.slice_count() - 1;

  const auto channel =
      weak_value(net, ProjectorExpr::path(port, final_slice), port);
  report.overlap = channel.overlap;
  report.postselect_probability = std::norm(channel.overlap);
  report.singular = channel.singular;
  report.dark = channel.singular;

  for (const PathLabel mirror : {"A", "B", "C", "E", "F"}) {
    const auto wv = mirror_weak_value(net, mirror, port);
    report.weak_values.push_back(WeakValueEntry{mirror, wv.value, wv.singular});
  }

  if (!effective.pointers.empty() && !report.singular) {
    const InstrumentedNetwork inet(net, effective.pointers);
    const auto jps = joint_pointer_state(inet, port);
    for (const auto& p : effective.pointers) {
      report.trace_magnitudes[p.mirror] =
          trace_distance(reduced_dm(jps, p.mirror), DensityMatrix::ground());
    }
    if (effective.pointers.size() == 2) {
      report.excited_excited_magnitude =
          std::abs(jps.amplitude({true, true}));
    }
  }

  if (!effective.vibrations.empty()) {
    const auto synthesis = synthesize(effective);
    const auto spectrum = power_spectrum(synthesis.record);
    report.dark = synthesis.record.dark;
    for (const auto& [mirror, vib] : effective.vibrations) {
      PeakEntry peak;
      peak.mirror = mirror;
      peak.frequency_hz = vib.frequency_hz;
      peak.power = spectrum.at_frequency(vib.frequency_hz);
      peak.amplitude = std::sqrt(2.0 * peak.power);
      report.peaks.push_back(peak);
    }
    if (!out_dir.empty()) {
      const std::filesystem::path dir(out_dir);
      std::filesystem::create_directories(dir);
      const auto ts_path = dir / (config.name + "_timeseries.csv");
      const auto sp_path = dir / (config.name + "_spectrum.csv");
      write_timeseries_csv(ts_path, synthesis.record);
      write_spectrum_csv(sp_path, spectrum);
      report.timeseries_csv = ts_path.string();
      report.spectrum_csv = sp_path.string();
    }
  }

  if (!out_dir.empty()) {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_text(dir / (config.name + "_report.json"), report_json(report));
  }
  return report;
}

std::string report_json(const RunReport& report) {
  json root;
  root["scenario"] = report.scenario;
  root["provenance"] = {{"config_hash", report.config_hash},
                        {"seed", report.seed},
                        {"version", report.version}};
  root["overlap"] = complex_json(report.overlap);
  root["postselect_probability"] = report.postselect_probability;
  root["singular"] = report.singular;
  root["dark"] = report.dark;
  json weak = json::array();
  for (const auto& entry : report.weak_values) {
    json e;
    e["mirror"] = entry.mirror;
    e["singular"] = entry.singular;
    if (entry.value) e["value"] = complex_json(*entry.value);
    weak.push_back(e);
  }
  root["weak_values"] = weak;
  json peaks = json::array();
  for (const auto& peak : report.peaks) {
    peaks.push_back({{"mirror", peak.mirror},
                     {"frequency_hz", peak.frequency_hz},
                     {"power", peak.power},
                     {"amplitude", peak.amplitude}});
  }
  root["peaks"] = peaks;
  json traces = json::object();
  for (const auto& [mirror, mag] : report.trace_magnitudes) {
    traces[mirror] = mag;
  }
  root["trace_magnitudes"] = traces;
  if (report.excited_excited_magnitude) {
    root["excited_excited_magnitude"] = *report.excited_excited_magnitude;
  }
  // artifact names only: the files sit next to the report, and identical
  // config + seed must reproduce the report byte for byte anywhere
  if (!report.timeseries_csv.empty()) {
    root["timeseries_csv"] =
        std::filesystem::path(report.timeseries_csv).filename().string();
  }
  if (!report.spectrum_csv.empty()) {
    root["spectrum_csv"] =
        std::filesystem::path(report.spectrum_csv).filename().string();
  }
  return root.dump(2);
}

SweepResult sweep(const ScenarioConfig& config, const std::string& parameter,
                  const std::vector<double>& values, const std::string& out_dir,
                  std::uint64_t seed) {
  if (values.empty()) {
    throw ConfigError("sweep needs at least one value");
  }
  SweepResult result;
  result.parameter = parameter;
  result.values = values;

  const std::filesystem::path dir(out_dir);
  if (!out_dir.empty()) std::filesystem::create_directories(dir);

  if (parameter == "epsilon") {
    result.trace_rows = trace_ratio_sweep(values, geometry_of(config));
    if (!out_dir.empty()) {
      const auto path = dir / (config.name + "_sweep_epsilon.csv");
      write_trace_sweep_csv(path, result.trace_rows);
      result.table_csv = path.string();
    }
    return result;
  }

  std::string header;
  std::string table;
  for (const double value : values) {
    ScenarioConfig point = config;
    if (parameter == "eta") {
      point.alignment_eta = value;
    } else if (parameter == "kick") {
      if (!(value >= 0.0)) throw ConfigError("kick values must be nonnegative");
      double max_kick = 0.0;
      for (const auto& [m, vib] : point.vibrations) {
        (void)m;
        max_kick = std::max(max_kick, vib.kick);
      }
      if (max_kick == 0.0) {
        throw ConfigError("kick sweep needs at least one vibrating mirror");
      }
      const double scale = value / max_kick;
      for (auto& [m, vib] : point.vibrations) {
        (void)m;
        vib.kick *= scale;
      }
    } else {
      throw ConfigError("unknown sweep parameter '" + parameter +
                        "' (expected epsilon, eta, or kick)");
    }
    point.name = config.name + "_" + parameter + "_" + format_double(value);
    RunReport row = run(point, out_dir, seed);
    if (header.empty()) {
      header = parameter + ",postselect_probability,dark";
      for (const auto& peak : row.peaks) header += ",amp_" + peak.mirror;
      header += '\n';
    }
    table += format_double(value);
    table += ',';
    table += format_double(row.postselect_probability);
    table += ',';
    table += row.dark ? '1' : '0';
    for (const auto& peak : row.peaks) {
      table += ',';
      table += format_double(peak.amplitude);
    }
    table += '\n';
    result.reports.push_back(std::move(row));
  }
  if (!out_dir.empty()) {
    const auto path = dir / (config.name + "_sweep_" + parameter + ".csv");
    write_text(path, header + table);
    result.table_csv = path.string();
  }
  return result;
}

}  // namespace nmzi
