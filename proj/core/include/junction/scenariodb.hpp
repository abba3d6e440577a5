#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "junction/extraction.hpp"

namespace junction {

enum class ScenarioSource { real, synthetic, sampled };
std::string_view to_string(ScenarioSource s);
std::optional<ScenarioSource> parse_source(std::string_view text);

struct Provenance {
  ScenarioSource source = ScenarioSource::real;
  std::string pipeline_version;
  std::string config_hash;

  bool operator==(const Provenance&) const = default;
};

struct ScenarioRecord {
  ConcreteScenario scenario;
  Provenance provenance;

  bool operator==(const ScenarioRecord&) const = default;
};

// Scenario JSON document: meta{}, core{}, participants[]. Doubles round-trip bit-exactly.
std::string scenario_to_json(const ScenarioRecord& record, int indent = 1);
ScenarioRecord scenario_from_json(const std::string& text);

struct ScenarioQuery {
  std::optional<ScenarioCategory> category;
  std::optional<std::string> functional_type;  // FunctionalType::key() or bare name
  std::optional<double> pet_min;
  std::optional<double> pet_max;
  std::optional<ScenarioSource> source;
};

// One JSON file per scenario named by its content hash, plus index.json. Writers are
// serialized; concurrent readers of a stable directory are safe.
class ScenarioDatabase {
 public:
  explicit ScenarioDatabase(std::filesystem::path dir);

  std::string store(const ScenarioRecord& record);
  ScenarioRecord load(const std::string& id) const;
  std::vector<std::string> query(const ScenarioQuery& q) const;
  std::vector<std::string> ids() const;
  std::size_t size() const { return index_.size(); }
  const std::filesystem::path& directory() const { return dir_; }

 private:
  struct Entry {
    ScenarioCategory category = ScenarioCategory::v2v;
    std::string type_key;
    std::string type_name;
    std::optional<double> pet;
    ScenarioSource source = ScenarioSource::real;
  };
  void write_index() const;

  std::filesystem::path dir_;
  std::map<std::string, Entry> index_;
  mutable std::mutex write_mutex_;
};

// Empirical distribution over observed values.
class EmpiricalMarginal {
 public:
  EmpiricalMarginal() = default;
  explicit EmpiricalMarginal(std::vector<double> values);

  const std::vector<double>& support() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }
  double min() const { return sorted_.front(); }
  double max() const { return sorted_.back(); }
  double mean() const;
  double variance() const;  // population variance
  double median() const;
  // Inverse CDF of the step distribution: sorted[floor(u * n)].
  double inverse_cdf(double u) const;

 private:
  std::vector<double> sorted_;
};

struct LogicalScenario {
  std::string functional_type;
  std::vector<std::string> parameter_names;
  std::vector<std::vector<double>> table;  // one row per concrete scenario
  std::vector<EmpiricalMarginal> marginals;
};

// ego/challenger distance to the conflict area [m], initial speeds [m/s], pet [s], participants.
std::vector<std::string> logical_parameter_names();
std::vector<double> logical_parameters(const ConcreteScenario& scn);

LogicalScenario fit_logical(const std::string& functional_type, std::span<const ScenarioRecord> records);
LogicalScenario fit_logical(const std::string& functional_type, const ScenarioDatabase& db);

// Independent inverse-transform draws per parameter; deterministic per seed.
std::vector<std::vector<double>> sample_concrete(const LogicalScenario& logical, std::size_t n, std::uint64_t seed);

// Uniform double in [0, 1) from the top 53 bits; same stream on every platform.
double unit_uniform(std::uint64_t bits);

// Minimal OpenSCENARIO-flavoured XML: one actor per participant following a polyline
// trajectory of (time, x, y, heading) vertices.
std::string export_openscenario(const ScenarioRecord& record);

}  // namespace junction
