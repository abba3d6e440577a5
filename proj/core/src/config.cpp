#include "junction/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "junction/csv.hpp"
#include "junction/hash.hpp"
#include "junction/types.hpp"

#ifndef JUNCTION_VERSION
#define JUNCTION_VERSION "0.0.0"
#endif

namespace junction {

std::string version() { return JUNCTION_VERSION; }

std::string_view to_string(ValueType t) {
  switch (t) {
    case ValueType::string: return "string";
    case ValueType::path: return "path";
    case ValueType::number: return "number";
    case ValueType::integer: return "integer";
    case ValueType::boolean: return "boolean";
  }
  return "string";
}

const std::vector<ConfigKey>& config_keys() {
  using T = ValueType;
  static const std::vector<ConfigKey> keys{
      {"paths.data", T::path, std::nullopt, "directory holding the recording CSV triple"},
      {"paths.columns", T::path, std::nullopt, "column map file; identity when absent"},
      {"paths.map", T::path, std::nullopt, "traffic space JSON"},
      {"paths.output", T::path, "out", "root of the run directories"},
      {"paths.scenarios", T::path, std::nullopt, "scenario database directory (stats, sample)"},
      {"data.prefix", T::string, "", "file prefix, e.g. 16_ for 16_tracks.csv"},
      {"run.id", T::string, std::nullopt, "run directory name; derived from the config hash when absent"},
      {"seed", T::integer, "1", "master seed"},
      {"filter.max_speed.*", T::number, std::nullopt, "per-kind speed limit [m/s]"},
      {"filter.min_lifetime.*", T::number, std::nullopt, "per-kind minimum lifetime [s]"},
      {"filter.min_path_length", T::number, "1", "[m]"},
      {"labeling.endpoint_window", T::integer, "5", "samples averaged at each end"},
      {"labeling.max_assign_distance", T::number, "10", "[m]"},
      {"extraction.roi_radius", T::number, "15", "[m]"},
      {"extraction.pet_threshold", T::number, "6.5", "[s]"},
      {"extraction.critical_pet", T::number, "1.5", "[s]"},
      {"extraction.lead", T::number, "1", "window margin before first ROI contact [s]"},
      {"extraction.tail", T::number, "1", "window margin after the conflict [s]"},
      {"extraction.path_spacing", T::number, "0.5", "[m]"},
      {"extraction.max_area_extent", T::number, "5", "[m]"},
      {"extraction.threads", T::integer, "1", ""},
      {"extraction.openscenario", T::boolean, "false", "also export .xosc files"},
      {"sim.dt", T::number, "0.02", "[s]"},
      {"sim.duration", T::number, "60", "[s]"},
      {"sim.integrator", T::string, "euler", "euler | heun"},
      {"sim.frame_rate", T::number, "25", "log rate [Hz]"},
      {"sim.spawn", T::path, std::nullopt, "spawn spec JSON (simulate)"},
      {"sim.params", T::path, std::nullopt, "model parameter JSON, e.g. a calibration result"},
      {"param.*", T::number, std::nullopt, "model parameter override, e.g. param.car.v0"},
      {"ga.population", T::integer, "50", ""},
      {"ga.generations", T::integer, "100", ""},
      {"ga.tournament", T::integer, "3", ""},
      {"ga.crossover_rate", T::number, "0.9", ""},
      {"ga.mutation_rate", T::number, "0.1", ""},
      {"ga.mutation_sigma", T::number, "0.1", "fraction of the gene range"},
      {"ga.elitism", T::integer, "2", ""},
      {"ga.threads", T::integer, "1", ""},
      {"calibrate.params", T::string, "car.v0:8:18,car.T_gap:0.5:4,car.a_max:0.5:3", "name:lower:upper,..."},
      {"calibrate.collision_weight", T::number, "10", ""},
      {"calibrate.max_agents", T::integer, "0", "0 uses every track"},
      {"replay.scenario", T::path, std::nullopt, "scenario JSON to replay"},
      {"replay.ego", T::integer, "0", "ego track id; 0 uses the scenario ego"},
      {"replay.policy", T::string, "baseline", "recorded | baseline | ramp:<start>:<rate>"},
      {"replay.threshold", T::number, "1.5", "dissimilarity trigger threshold"},
      {"replay.position_weight", T::number, "1", ""},
      {"replay.heading_weight", T::number, "0", ""},
      {"replay.speed_weight", T::number, "0", ""},
      {"replay.rewind", T::number, "2", "[s]"},
      {"replay.variations", T::integer, "0", "number of aggressive variations after a trigger"},
      {"replay.audit", T::boolean, "true", "run the false-positive audit"},
      {"replay.critical_pet", T::number, "1.5", "[s]"},
      {"replay.threads", T::integer, "1", ""},
      {"stats.all_types", T::boolean, "true", "list types without scenarios with count 0"},
      {"sample.functional_type", T::string, std::nullopt, "type key or name to fit"},
      {"sample.n", T::integer, "100", "number of concrete draws"},
  };
  return keys;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool matches(const ConfigKey& k, const std::string& name) {
  if (k.name.size() > 2 && k.name.ends_with(".*")) {
    const std::string prefix = k.name.substr(0, k.name.size() - 1);
    return name.size() > prefix.size() && name.starts_with(prefix);
  }
  return k.name == name;
}

std::optional<bool> parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  return std::nullopt;
}

void check_type(const ConfigKey& k, const std::string& key, const std::string& value) {
  auto fail = [&] {
    throw ConfigError("config key '" + key + "': expected " + std::string(to_string(k.type)) + ", got '" + value + "'");
  };
  switch (k.type) {
    case ValueType::number:
      try {
        (void)csv::parse_double(value, key);
      } catch (const std::invalid_argument&) {
        fail();
      }
      break;
    case ValueType::integer:
      try {
        (void)csv::parse_int(value, key);
      } catch (const std::invalid_argument&) {
        fail();
      }
      break;
    case ValueType::boolean:
      if (!parse_bool(value)) fail();
      break;
    case ValueType::path:
      if (value.empty()) fail();
      break;
    case ValueType::string:
      break;
  }
}

}  // namespace

const ConfigKey& RunConfig::key_or_throw(const std::string& key) const {
  for (const auto& k : config_keys()) {
    if (matches(k, key)) return k;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  RunConfig cfg = parse(buf.str(), file.string());
  cfg.set_base_dir(file.parent_path());
  return cfg;
}

void RunConfig::set_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "': expected key=value");
  const std::string key = trim(assignment.substr(0, eq));
  set(key, trim(assignment.substr(eq + 1)));
  from_command_line_.insert(key);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  check_type(key_or_throw(key), key, value);
  values_[key] = value;
  from_command_line_.erase(key);
}

bool RunConfig::has(const std::string& key) const { return values_.contains(key); }

std::optional<std::string> RunConfig::raw(const std::string& key) const { return effective(key); }

std::optional<std::string> RunConfig::effective(const std::string& key) const {
  const auto& k = key_or_throw(key);
  if (auto it = values_.find(key); it != values_.end()) return it->second;
  return k.default_value;
}

std::string RunConfig::get_string(const std::string& key) const {
  const auto v = effective(key);
  if (!v) {
    throw ConfigError("missing config key '" + key + "' (expected " + std::string(to_string(key_or_throw(key).type)) + ")");
  }
  return *v;
}

std::filesystem::path RunConfig::get_path(const std::string& key) const {
  std::filesystem::path p = get_string(key);
  if (p.is_relative() && !base_dir_.empty() && values_.contains(key) && !from_command_line_.contains(key)) {
    p = base_dir_ / p;
  }
  return p;
}

double RunConfig::get_double(const std::string& key) const {
  return csv::parse_double(get_string(key), key);
}

long long RunConfig::get_int(const std::string& key) const { return csv::parse_int(get_string(key), key); }

bool RunConfig::get_bool(const std::string& key) const { return *parse_bool(get_string(key)); }

std::map<std::string, std::string> RunConfig::with_prefix(const std::string& prefix) const {
  std::map<std::string, std::string> out;
  const std::string p = prefix + ".";
  for (const auto& [k, v] : values_) {
    if (k.starts_with(p)) out[k.substr(p.size())] = v;
  }
  return out;
}

std::string RunConfig::canonical() const { return canonical(true); }

std::string RunConfig::canonical(bool with_location) const {
  std::map<std::string, std::string> all;
  for (const auto& k : config_keys()) {
    if (!k.name.ends_with(".*") && k.default_value) all[k.name] = *k.default_value;
  }
  for (const auto& [k, v] : values_) all[k] = v;
  if (!with_location) {
    all.erase("paths.output");
    all.erase("run.id");
  }
  std::string out;
  for (const auto& [k, v] : all) out += k + " = " + v + "\n";
  return out;
}

std::string RunConfig::hash() const { return content_hash(version() + "\n" + canonical(false)); }

}  // namespace junction
