#include "nmzi/scenario.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include <json.hpp>

#include "nmzi/fft.hpp"

namespace nmzi {

namespace {

using nlohmann::json;

const std::set<std::string> kMirrorNames = {"A", "B", "C", "E", "F"};

// Default mirror vibration frequencies (Hz): bin-aligned for a 1 s record and
// free of first-order intermodulation collisions among the driven lines.
const std::map<PathLabel, double> kDefaultFrequencies = {
    {"A", 300.0}, {"B", 282.0}, {"C", 318.0}, {"E", 336.0}, {"F", 348.0}};

constexpr double kDefaultKick = 0.005;
constexpr double kMaxKick = 0.01;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("unknown field '" + it.key() + "' in " + where);
    }
  }
}

double require_number(const json& obj, const std::string& key,
                      const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    throw ConfigError("missing numeric field '" + key + "' in " + where);
  }
  return obj[key].get<double>();
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  reject_unknown_keys(root,
                      {"schema_version", "name", "splitters", "alignment_eta",
                       "blocks", "vibrations", "pointers", "run", "noise"},
                      "config");
  if (!root.contains("schema_version") ||
      !root["schema_version"].is_number_integer() ||
      root["schema_version"].get<int>() != kSchemaVersion) {
    throw ConfigError("config must declare schema_version " +
                      std::to_string(kSchemaVersion));
  }

  ScenarioConfig config;
  if (root.contains("name")) {
    if (!root["name"].is_string()) throw ConfigError("'name' must be a string");
    config.name = root["name"].get<std::string>();
  }
  if (root.contains("splitters")) {
    const auto& sp = root["splitters"];
    if (!sp.is_object()) throw ConfigError("'splitters' must be an object");
    reject_unknown_keys(sp, {"outer", "inner"}, "splitters");
    if (sp.contains("outer")) config.splitters.outer = require_number(sp, "outer", "splitters");
    if (sp.contains("inner")) config.splitters.inner = require_number(sp, "inner", "splitters");
  }
  if (root.contains("alignment_eta")) {
    if (!root["alignment_eta"].is_number()) {
      throw ConfigError("'alignment_eta' must be a number");
    }
    config.alignment_eta = root["alignment_eta"].get<double>();
  }
  if (root.contains("blocks")) {
    if (!root["blocks"].is_array()) throw ConfigError("'blocks' must be an array");
    for (const auto& b : root["blocks"]) {
      if (!b.is_string()) throw ConfigError("block entries must be path labels");
      config.blocks.push_back(b.get<std::string>());
    }
  }
  if (root.contains("vibrations")) {
    const auto& vib = root["vibrations"];
    if (!vib.is_object()) throw ConfigError("'vibrations' must be an object");
    for (auto it = vib.begin(); it != vib.end(); ++it) {
      const auto& v = it.value();
      if (!v.is_object()) throw ConfigError("vibration entries must be objects");
      reject_unknown_keys(v, {"frequency_hz", "kick", "phase"},
                          "vibrations." + it.key());
      VibrationSpec spec;
      spec.frequency_hz = require_number(v, "frequency_hz", "vibrations." + it.key());
      spec.kick = require_number(v, "kick", "vibrations." + it.key());
      if (v.contains("phase")) spec.phase = require_number(v, "phase", "vibrations." + it.key());
      config.vibrations[it.key()] = spec;
    }
  }
  if (root.contains("pointers")) {
    if (!root["pointers"].is_array()) throw ConfigError("'pointers' must be an array");
    for (const auto& p : root["pointers"]) {
      if (!p.is_object()) throw ConfigError("pointer entries must be objects");
      reject_unknown_keys(p, {"mirror", "epsilon"}, "pointers[]");
      if (!p.contains("mirror") || !p["mirror"].is_string()) {
        throw ConfigError("pointer entries need a 'mirror' label");
      }
      PointerSpec spec;
      spec.mirror = p["mirror"].get<std::string>();
      spec.epsilon = require_number(p, "epsilon", "pointers[]");
      config.pointers.push_back(spec);
    }
  }
  if (root.contains("run")) {
    const auto& run = root["run"];
    if (!run.is_object()) throw ConfigError("'run' must be an object");
    reject_unknown_keys(run, {"duration_s", "sample_rate_hz", "grid"}, "run");
    if (run.contains("duration_s")) config.run.duration_s = require_number(run, "duration_s", "run");
    if (run.contains("sample_rate_hz")) {
      config.run.sample_rate_hz = require_number(run, "sample_rate_hz", "run");
    }
    if (run.contains("grid")) {
      const auto& grid = run["grid"];
      if (!grid.is_object()) throw ConfigError("'run.grid' must be an object");
      reject_unknown_keys(grid, {"points", "half_width", "waist"}, "run.grid");
      if (grid.contains("points")) {
        if (!grid["points"].is_number_integer()) {
          throw ConfigError("'run.grid.points' must be an integer");
        }
        config.run.grid.points = grid["points"].get<int>();
      }
      if (grid.contains("half_width")) {
        config.run.grid.half_width = require_number(grid, "half_width", "run.grid");
      }
      if (grid.contains("waist")) {
        config.run.grid.waist = require_number(grid, "waist", "run.grid");
      }
    }
  }
  if (root.contains("noise")) {
    const auto& noise = root["noise"];
    if (!noise.is_object()) throw ConfigError("'noise' must be an object");
    reject_unknown_keys(noise, {"seed", "photon_budget"}, "noise");
    NoiseSpec spec;
    if (noise.contains("seed")) {
      if (!noise["seed"].is_number_unsigned() && !noise["seed"].is_number_integer()) {
        throw ConfigError("'noise.seed' must be an integer");
      }
      spec.seed = noise["seed"].get<std::uint64_t>();
    }
    spec.photon_budget = require_number(noise, "photon_budget", "noise");
    config.noise = spec;
  }
  return config;
}

std::string serialize_config(const ScenarioConfig& config) {
  json root;
  root["schema_version"] = kSchemaVersion;
  root["name"] = config.name;
  root["splitters"] = {{"outer", config.splitters.outer},
                       {"inner", config.splitters.inner}};
  root["alignment_eta"] = config.alignment_eta;
  root["blocks"] = config.blocks;
  json vib = json::object();
  for (const auto& [mirror, spec] : config.vibrations) {
    vib[mirror] = {{"frequency_hz", spec.frequency_hz},
                   {"kick", spec.kick},
                   {"phase", spec.phase}};
  }
  root["vibrations"] = vib;
  json pointers = json::array();
  for (const auto& p : config.pointers) {
    pointers.push_back({{"mirror", p.mirror}, {"epsilon", p.epsilon}});
  }
  root["pointers"] = pointers;
  root["run"] = {{"duration_s", config.run.duration_s},
                 {"sample_rate_hz", config.run.sample_rate_hz},
                 {"grid",
                  {{"points", config.run.grid.points},
                   {"half_width", config.run.grid.half_width},
                   {"waist", config.run.grid.waist}}}};
  if (config.noise) {
    root["noise"] = {{"seed", config.noise->seed},
                     {"photon_budget", config.noise->photon_budget}};
  }
  return root.dump(2);
}

void validate_config(const ScenarioConfig& config) {
  const auto& c = config;
  if (!(c.splitters.outer >= 0.0 && c.splitters.outer <= 1.0) ||
      !(c.splitters.inner >= 0.0 && c.splitters.inner <= 1.0)) {
    throw ConfigError("splitter ratios must lie in [0, 1]");
  }
  if (!std::isfinite(c.alignment_eta)) {
    throw ConfigError("alignment_eta must be finite");
  }
  const std::set<PathLabel> known_paths = {"IN", "A",    "B", "C",   "E",
                                           "F",  "DUMP", "D", "DARK"};
  std::set<PathLabel> seen_blocks;
  for (const auto& b : c.blocks) {
    if (!known_paths.count(b)) throw ConfigError("unknown blocked path '" + b + "'");
    if (!seen_blocks.insert(b).second) {
      throw ConfigError("path '" + b + "' blocked twice");
    }
  }
  const double duration = c.run.duration_s;
  const double rate = c.run.sample_rate_hz;
  if (!(duration > 0.0) || !(rate > 0.0)) {
    throw ConfigError("run duration and sample rate must be positive");
  }
  const double samples = duration * rate;
  if (std::abs(samples - std::round(samples)) > 1e-9 ||
      !is_power_of_two(static_cast<std::size_t>(std::llround(samples)))) {
    throw ConfigError("duration * sample_rate must be a power of two");
  }
  std::map<long long, VibrationSpec> freq_bins;
  for (const auto& [mirror, spec] : c.vibrations) {
    if (!kMirrorNames.count(mirror)) {
      throw ConfigError("vibration on unknown mirror '" + mirror + "'");
    }
    if (!(spec.frequency_hz > 0.0)) {
      throw ConfigError("vibration frequency must be positive");
    }
    if (!(spec.frequency_hz < rate / 2.0)) {
      throw ConfigError("vibration frequency must lie below Nyquist");
    }
    const double bins = spec.frequency_hz * duration;
    if (std::abs(bins - std::round(bins)) > 1e-9) {
      throw ConfigError("vibration frequency of mirror '" + mirror +
                        "' is not an integer multiple of 1/duration");
    }
    // Frequencies must be distinct so peaks tag mirrors one to one; the only
    // exception is deliberate common-mode driving with identical spec.
    const auto [it, inserted] = freq_bins.emplace(std::llround(bins), spec);
    if (!inserted && (it->second.kick != spec.kick ||
                      it->second.phase != spec.phase)) {
      throw ConfigError(
          "vibration frequencies must be distinct unless driven common-mode "
          "with identical amplitude and phase");
    }
    if (!(spec.kick >= 0.0 && spec.kick <= kMaxKick)) {
      throw ConfigError("vibration kick outside the weak-coupling range [0, " +
                        std::to_string(kMaxKick) + "]");
    }
    if (!std::isfinite(spec.phase)) {
      throw ConfigError("vibration phase must be finite");
    }
  }
  if (static_cast<int>(c.pointers.size()) > kMaxPointers) {
    throw ConfigError("at most 6 pointers are supported");
  }
  std::set<PathLabel> seen_pointers;
  for (const auto& p : c.pointers) {
    if (!kMirrorNames.count(p.mirror)) {
      throw ConfigError("pointer on unknown mirror '" + p.mirror + "'");
    }
    if (!seen_pointers.insert(p.mirror).second) {
      throw ConfigError("duplicate pointer at mirror '" + p.mirror + "'");
    }
    if (!(p.epsilon >= 0.0 && p.epsilon <= std::numbers::pi / 2.0)) {
      throw ConfigError("pointer coupling outside [0, pi/2]");
    }
  }
  const auto& grid = c.run.grid;
  if (grid.points < 128 || !is_power_of_two(static_cast<std::size_t>(grid.points))) {
    throw ConfigError("grid points must be a power of two, at least 128");
  }
  if (!(grid.waist > 0.0)) throw ConfigError("beam waist must be positive");
  if (!(grid.half_width >= 4.0 * grid.waist)) {
    throw ConfigError("grid half width must cover at least four beam waists");
  }
  if (grid.waist < 4.0 * grid.dx()) {
    throw ConfigError("grid under-resolves the beam waist (need >= 4 steps)");
  }
  if (c.noise && !(c.noise->photon_budget > 0.0)) {
    throw ConfigError("noise photon_budget must be positive");
  }
}

ScenarioConfig builtin_scenario(const std::string& name) {
  ScenarioConfig config;
  config.name = name;
  auto vibrate_all = [&]() {
    for (const auto& [mirror, freq] : kDefaultFrequencies) {
      config.vibrations[mirror] = VibrationSpec{freq, kDefaultKick, 0.0};
    }
  };
  if (name == "fig2b") {
    vibrate_all();
  } else if (name == "fig2c") {
    vibrate_all();
    config.blocks = {"C"};
  } else if (name == "salih") {
    const double f = kDefaultFrequencies.at("A");
    config.vibrations["A"] = VibrationSpec{f, kDefaultKick, 0.0};
    config.vibrations["B"] = VibrationSpec{f, kDefaultKick, 0.0};
  } else if (name == "leakage_sweep") {
    vibrate_all();
    config.blocks = {"C"};
    config.alignment_eta = 1e-3;
  } else if (name == "paradox") {
    config.pointers = {{"A", 0.05}, {"B", 0.05}};
  } else if (name == "trace_sweep") {
    for (const PathLabel m : {"A", "B", "C", "E", "F"}) {
      config.pointers.push_back(PointerSpec{m, 0.1});
    }
  } else {
    std::string names;
    for (const auto& [known, desc] : builtin_scenarios()) {
      (void)desc;
      if (!names.empty()) names += ", ";
      names += known;
    }
    throw ConfigError("unknown scenario '" + name + "' (expected one of: " +
                      names + ")");
  }
  validate_config(config);
  return config;
}

std::vector<std::pair<std::string, std::string>> builtin_scenarios() {
  return {
      {"fig2b",
       "all five mirrors vibrating at distinct frequencies, ideal alignment"},
      {"fig2c", "fig2b with the lower outer arm (path C) blocked"},
      {"salih", "mirrors A and B driven identically (common mode)"},
      {"leakage_sweep",
       "C blocked with a small alignment phase; sweep eta to size the leakage"},
      {"paradox", "qubit pointers at A and B, no vibrations"},
      {"trace_sweep",
       "identical pointer couplings at A, B, C, E, F; sweep epsilon"},
  };
}

NestedGeometry geometry_of(const ScenarioConfig& config) {
  NestedGeometry g;
  g.outer_reflectivity = config.splitters.outer;
  g.inner_reflectivity = config.splitters.inner;
  g.alignment_eta = config.alignment_eta;
  g.vibrations = config.vibrations;
  g.blocks = config.blocks;
  return g;
}

}  // namespace nmzi
