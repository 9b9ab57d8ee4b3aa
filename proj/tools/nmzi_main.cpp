// Command-line front end: reproducible scenario runs, sweeps, and weak-value
// tables. Exit codes: 0 success, 1 validation error, 2 runtime error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nmzi/report.hpp"

namespace {

nmzi::ScenarioConfig load_config(const std::string& config_path,
                                 const std::string& scenario_name) {
  if (!config_path.empty() && !scenario_name.empty()) {
    throw nmzi::ConfigError("pass either --config or --scenario, not both");
  }
  if (!config_path.empty()) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
      throw nmzi::ConfigError("cannot read config file '" + config_path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    auto config = nmzi::parse_config(text.str());
    nmzi::validate_config(config);
    return config;
  }
  if (!scenario_name.empty()) {
    return nmzi::builtin_scenario(scenario_name);
  }
  throw nmzi::ConfigError("one of --config or --scenario is required");
}

void print_weak_values(const nmzi::RunReport& report, bool as_json) {
  if (as_json) {
    std::cout << nmzi::report_json(report) << "\n";
    return;
  }
  std::cout << "mirror,weak_value_re,weak_value_im,singular\n";
  for (const auto& entry : report.weak_values) {
    std::cout << entry.mirror << ',';
    if (entry.value) {
      std::cout << nmzi::format_double(entry.value->real()) << ','
                << nmzi::format_double(entry.value->imag());
    } else {
      std::cout << ',';
    }
    std::cout << ',' << (entry.singular ? '1' : '0') << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nested Mach-Zehnder weak-trace simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string scenario_name;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string format = "csv";
  std::string parameter;
  std::vector<double> values;

  auto add_common = [&](CLI::App* cmd, bool with_out) {
    cmd->add_option("--config", config_path, "scenario config JSON path");
    cmd->add_option("--scenario", scenario_name, "built-in scenario name");
    if (with_out) cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "noise seed");
    cmd->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  auto* run_cmd = app.add_subcommand("run", "execute a scenario");
  add_common(run_cmd, true);

  auto* sweep_cmd = app.add_subcommand("sweep", "run one scenario per value");
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--param", parameter, "epsilon, eta, or kick")
      ->required();
  sweep_cmd->add_option("--values", values, "comma-separated parameter values")
      ->required()
      ->delimiter(',');

  auto* weak_cmd = app.add_subcommand("weak-values", "print the weak-value table");
  add_common(weak_cmd, false);

  auto* scenarios_cmd = app.add_subcommand("scenarios", "scenario catalog");
  auto* list_cmd = scenarios_cmd->add_subcommand("list", "list built-in scenarios");
  scenarios_cmd->require_subcommand(1);

  auto* validate_cmd = app.add_subcommand("validate", "validate a config file");
  validate_cmd->add_option("--config", config_path, "scenario config JSON path")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_cmd->parsed()) {
      for (const auto& [name, description] : nmzi::builtin_scenarios()) {
        std::cout << name << "  -  " << description << "\n";
      }
      return 0;
    }
    if (validate_cmd->parsed()) {
      load_config(config_path, "");
      std::cout << "ok\n";
      return 0;
    }
    const auto config = load_config(config_path, scenario_name);
    if (run_cmd->parsed()) {
      const auto report = nmzi::run(config, out_dir, seed);
      if (format == "json") {
        std::cout << nmzi::report_json(report) << "\n";
      } else {
        std::cout << "scenario," << report.scenario << "\n";
        std::cout << "postselect_probability,"
                  << nmzi::format_double(report.postselect_probability) << "\n";
        std::cout << "dark," << (report.dark ? '1' : '0') << "\n";
        for (const auto& peak : report.peaks) {
          std::cout << "peak_" << peak.mirror << "_amplitude,"
                    << nmzi::format_double(peak.amplitude) << "\n";
        }
        for (const auto& [mirror, mag] : report.trace_magnitudes) {
          std::cout << "trace_" << mirror << ","
                    << nmzi::format_double(mag) << "\n";
        }
      }
      return 0;
    }
    if (sweep_cmd->parsed()) {
      const auto result = nmzi::sweep(config, parameter, values, out_dir, seed);
      if (!result.table_csv.empty()) {
        std::cout << result.table_csv << "\n";
      } else if (parameter == "epsilon") {
        for (const auto& row : result.trace_rows) {
          std::cout << nmzi::format_double(row.epsilon) << ','
                    << nmzi::format_double(row.mag_A) << ','
                    << nmzi::format_double(row.mag_B) << ','
                    << nmzi::format_double(row.mag_C) << ','
                    << nmzi::format_double(row.mag_E) << ','
                    << nmzi::format_double(row.mag_F) << ',';
          if (row.ratio_EF_to_AB) {
            std::cout << nmzi::format_double(*row.ratio_EF_to_AB);
          }
          std::cout << "\n";
        }
      }
      return 0;
    }
    if (weak_cmd->parsed()) {
      const auto report = nmzi::run(config, "", seed);
      print_weak_values(report, format == "json");
      return 0;
    }
  } catch (const nmzi::ConfigError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
