#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "junction/hash.hpp"
#include "junction/scenariodb.hpp"

namespace junction {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& p, const std::string& content) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, p);
}

}  // namespace

ScenarioDatabase::ScenarioDatabase(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  const auto idx = dir_ / "index.json";
  if (!fs::exists(idx)) return;
  try {
    const json doc = json::parse(read_file(idx));
    for (const auto& e : doc.at("scenarios")) {
      Entry entry;
      entry.category = parse_category(e.at("category").get<std::string>()).value_or(ScenarioCategory::v2v);
      entry.type_name = e.at("functional_type").get<std::string>();
      entry.type_key = std::string(to_string(entry.category)) + ":" + entry.type_name;
      if (!e.at("pet").is_null()) entry.pet = e.at("pet").get<double>();
      entry.source = parse_source(e.at("source").get<std::string>()).value_or(ScenarioSource::real);
      index_[e.at("id").get<std::string>()] = std::move(entry);
    }
  } catch (const json::exception& e) {
    throw DataError("scenario index " + idx.string() + ": " + e.what());
  }
}

void ScenarioDatabase::write_index() const {
  json arr = json::array();
  for (const auto& [id, e] : index_) {
    arr.push_back({{"id", id},
                   {"category", std::string(to_string(e.category))},
                   {"functional_type", e.type_name},
                   {"pet", e.pet ? json(*e.pet) : json(nullptr)},
                   {"source", std::string(to_string(e.source))}});
  }
  json doc;
  doc["scenarios"] = std::move(arr);
  write_file_atomic(dir_ / "index.json", doc.dump(1) + "\n");
}

std::string ScenarioDatabase::store(const ScenarioRecord& record) {
  const std::string text = scenario_to_json(record);
  const std::string id = content_hash(text);
  std::lock_guard lock(write_mutex_);
  const auto path = dir_ / (id + ".json");
  if (!fs::exists(path)) write_file_atomic(path, text + "\n");
  const auto& core = record.scenario.core;
  Entry e;
  e.category = core.category;
  e.type_name = core.functional_type.name;
  e.type_key = core.functional_type.key();
  e.pet = core.pet.pet;
  e.source = record.provenance.source;
  index_[id] = std::move(e);
  write_index();
  return id;
}

ScenarioRecord ScenarioDatabase::load(const std::string& id) const {
  if (!index_.contains(id)) throw NotFoundError("scenario '" + id + "' not found in " + dir_.string());
  return scenario_from_json(read_file(dir_ / (id + ".json")));
}

std::vector<std::string> ScenarioDatabase::query(const ScenarioQuery& q) const {
  std::vector<std::string> out;
  for (const auto& [id, e] : index_) {
    if (q.category && e.category != *q.category) continue;
    if (q.functional_type && *q.functional_type != e.type_key && *q.functional_type != e.type_name) continue;
    if (q.pet_min || q.pet_max) {
      if (!e.pet) continue;
      if (q.pet_min && *e.pet < *q.pet_min) continue;
      if (q.pet_max && *e.pet > *q.pet_max) continue;
    }
    if (q.source && e.source != *q.source) continue;
    out.push_back(id);
  }
  return out;  // std::map iteration is already sorted by id
}

std::vector<std::string> ScenarioDatabase::ids() const { return query({}); }

// ---------------------------------------------------------------------------

EmpiricalMarginal::EmpiricalMarginal(std::vector<double> values) : sorted_(std::move(values)) {
  if (sorted_.empty()) throw DataError("empirical marginal needs at least one value");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalMarginal::mean() const {
  double s = 0.0;
  for (double v : sorted_) s += v;
  return s / static_cast<double>(sorted_.size());
}

double EmpiricalMarginal::variance() const {
  const double m = mean();
  double s = 0.0;
  for (double v : sorted_) s += (v - m) * (v - m);
  return s / static_cast<double>(sorted_.size());
}

double EmpiricalMarginal::median() const { return quantile_sorted(sorted_, 0.5); }

double EmpiricalMarginal::inverse_cdf(double u) const {
  const auto n = sorted_.size();
  auto i = static_cast<std::size_t>(std::floor(u * static_cast<double>(n)));
  return sorted_[std::min(i, n - 1)];
}

std::vector<std::string> logical_parameter_names() {
  return {"ego_distance_to_conflict",  "challenger_distance_to_conflict", "ego_initial_speed",
          "challenger_initial_speed", "pet",                             "participant_count"};
}

std::vector<double> logical_parameters(const ConcreteScenario& scn) {
  auto initial_speed = [&](int id) {
    const Track* t = scn.participant(id);
    return t && !t->samples.empty() ? speed(t->samples.front()) : 0.0;
  };
  return {scn.core.ego_distance_to_conflict,
          scn.core.challenger_distance_to_conflict,
          initial_speed(scn.core.ego_track_id),
          initial_speed(scn.core.challenger_track_id),
          scn.core.pet.pet.value_or(std::nan("")),
          static_cast<double>(scn.participants.size())};
}

LogicalScenario fit_logical(const std::string& functional_type, std::span<const ScenarioRecord> records) {
  LogicalScenario out;
  out.functional_type = functional_type;
  out.parameter_names = logical_parameter_names();
  for (const auto& r : records) {
    const auto& ft = r.scenario.core.functional_type;
    if (ft.key() != functional_type && ft.name != functional_type) continue;
    if (!r.scenario.core.pet.pet) continue;
    out.table.push_back(logical_parameters(r.scenario));
  }
  if (out.table.empty()) throw DataError("fit_logical: no scenarios of type '" + functional_type + "'");
  for (std::size_t k = 0; k < out.parameter_names.size(); ++k) {
    std::vector<double> col;
    col.reserve(out.table.size());
    for (const auto& row : out.table) col.push_back(row[k]);
    out.marginals.emplace_back(std::move(col));
  }
  return out;
}

LogicalScenario fit_logical(const std::string& functional_type, const ScenarioDatabase& db) {
  ScenarioQuery q;
  q.functional_type = functional_type;
  std::vector<ScenarioRecord> records;
  for (const auto& id : db.query(q)) records.push_back(db.load(id));
  return fit_logical(functional_type, records);
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::vector<std::vector<double>> sample_concrete(const LogicalScenario& logical, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("sample_concrete: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> out(n, std::vector<double>(logical.marginals.size()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < logical.marginals.size(); ++k) out[i][k] = logical.marginals[k].inverse_cdf(unit_uniform(rng()));
  }
  return out;
}

}  // namespace junction
