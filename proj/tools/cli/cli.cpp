#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "junction/calibrate.hpp"
#include "junction/csv.hpp"
#include "junction/extraction.hpp"
#include "junction/maneuvers.hpp"
#include "junction/preprocess.hpp"
#include "junction/replay.hpp"
#include "junction/scenariodb.hpp"
#include "junction/simcore.hpp"
#include "junction/traffic_space.hpp"
#include "junction/trajdata.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace junction::cli {

std::string run_id(const RunConfig& cfg, const std::string& subcommand) {
  if (auto id = cfg.raw("run.id")) return *id;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << subcommand << '-' << std::put_time(&tm, "%Y%m%dT%H%M%SZ") << '-' << cfg.hash().substr(0, 8);
  return ss.str();
}

std::string csv_stamp(const RunConfig& cfg) { return "# junction " + version() + " config " + cfg.hash() + "\n"; }

namespace {

// ---------------------------------------------------------------------------
// Files

std::string read_file(const fs::path& p, const std::string& key) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw NotFoundError(key + ": cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  f << content;
  if (!f) throw DataError("cannot write " + p.string());
}

struct Run {
  RunConfig cfg;
  std::string hash;
  fs::path dir;
  std::ostream& log;

  std::string subcommand;

  fs::path path(const char* sub, const std::string& name) const { return dir / sub / name; }

  // Creates the run directory; called once the inputs have been read, so failed runs leave
  // nothing behind.
  void open() const {
    for (const char* sub : {"scenarios", "logs", "reports"}) fs::create_directories(dir / sub);
    write_file(dir / "config.snapshot", "# junction " + version() + " " + subcommand + "\n" + cfg.canonical());
  }

  template <class Fn>
  void csv(const char* sub, const std::string& name, Fn&& fn) const {
    std::ostringstream ss;
    ss << csv_stamp(cfg);
    fn(ss);
    write_file(path(sub, name), ss.str());
  }

  void json_file(const char* sub, const std::string& name, json doc) const {
    json stamped;
    stamped["version"] = version();
    stamped["config_hash"] = hash;
    for (auto& [k, v] : doc.items()) stamped[k] = v;
    write_file(path(sub, name), stamped.dump(2) + "\n");
  }
};

Run make_run(const RunConfig& cfg, const std::string& subcommand, std::ostream& log) {
  return Run{cfg, cfg.hash(), cfg.get_path("paths.output") / run_id(cfg, subcommand), log, subcommand};
}

// ---------------------------------------------------------------------------
// Config -> module settings

std::uint64_t seed_of(const RunConfig& c) {
  const auto v = c.get_int("seed");
  if (v < 0) throw ConfigError("config key 'seed': expected integer >= 0");
  return static_cast<std::uint64_t>(v);
}

unsigned threads_of(const RunConfig& c, const std::string& key) {
  const auto v = c.get_int(key);
  if (v < 1) throw ConfigError("config key '" + key + "': expected integer >= 1");
  return static_cast<unsigned>(v);
}

AgentKind kind_key(const std::string& key, const std::string& suffix) {
  const auto k = parse_agent_kind(suffix);
  if (!k) throw ConfigError("config key '" + key + "': '" + suffix + "' is not an agent kind");
  return *k;
}

FilterRules filter_rules(const RunConfig& c, double frame_rate) {
  auto r = FilterRules::defaults(frame_rate);
  for (const auto& [suffix, _] : c.with_prefix("filter.max_speed")) {
    const std::string key = "filter.max_speed." + suffix;
    r.max_speed_by_kind[kind_key(key, suffix)] = c.get_double(key);
  }
  for (const auto& [suffix, _] : c.with_prefix("filter.min_lifetime")) {
    const std::string key = "filter.min_lifetime." + suffix;
    r.min_lifetime_frames_by_kind[kind_key(key, suffix)] = std::llround(c.get_double(key) * frame_rate);
  }
  r.min_path_length = c.get_double("filter.min_path_length");
  r.validate();
  return r;
}

LabelingConfig labeling_config(const RunConfig& c) {
  LabelingConfig l;
  l.endpoint_window = static_cast<int>(c.get_int("labeling.endpoint_window"));
  l.max_assign_distance = c.get_double("labeling.max_assign_distance");
  l.validate();
  return l;
}

ExtractionConfig extraction_config(const RunConfig& c) {
  ExtractionConfig e;
  e.roi_radius = c.get_double("extraction.roi_radius");
  e.pet_threshold = c.get_double("extraction.pet_threshold");
  e.critical_pet = c.get_double("extraction.critical_pet");
  e.margins.lead_s = c.get_double("extraction.lead");
  e.margins.tail_s = c.get_double("extraction.tail");
  e.path_spacing = c.get_double("extraction.path_spacing");
  e.max_area_extent = c.get_double("extraction.max_area_extent");
  e.threads = threads_of(c, "extraction.threads");
  e.validate();
  return e;
}

SimConfig sim_config(const RunConfig& c) {
  SimConfig s;
  s.dt = c.get_double("sim.dt");
  s.duration = c.get_double("sim.duration");
  s.seed = seed_of(c);
  s.frame_rate = c.get_double("sim.frame_rate");
  const auto integ = parse_integrator(c.get_string("sim.integrator"));
  if (!integ) throw ConfigError("config key 'sim.integrator': expected euler | heun");
  s.integrator = *integ;
  s.validate();
  return s;
}

ModelParams model_params(const RunConfig& c) {
  ModelParams p = ModelParams::defaults();
  if (c.raw("sim.params")) {
    const std::string text = read_file(c.get_path("sim.params"), "sim.params");
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("sim.params: ") + e.what());
    }
    // Calibration results wrap the parameter object with stamps.
    p = ModelParams::from_json(doc.contains("params") ? doc.at("params").dump() : text);
  }
  for (const auto& [name, _] : c.with_prefix("param")) p.set(name, c.get_double("param." + name));
  p.validate();
  return p;
}

TrafficSpace load_space(const RunConfig& c) {
  const fs::path p = c.get_path("paths.map");
  if (!fs::exists(p)) throw NotFoundError("paths.map: no such file " + p.string());
  return load_traffic_space(p);
}

Recording load_input(const RunConfig& c) {
  const fs::path dir = c.get_path("paths.data");
  const std::string prefix = c.get_string("data.prefix");
  RecordingFiles files{dir / (prefix + "recordingMeta.csv"), dir / (prefix + "tracksMeta.csv"),
                       dir / (prefix + "tracks.csv")};
  for (const auto& f : {files.meta, files.tracks_meta, files.tracks}) {
    if (!fs::exists(f)) throw NotFoundError("paths.data: no such file " + f.string());
  }
  const ColumnMap columns = c.raw("paths.columns") ? ColumnMap::read(c.get_path("paths.columns")) : ColumnMap::identity();
  return load_recording(files, columns);
}

std::vector<std::string> all_type_keys(const Taxonomy& t) {
  std::vector<std::string> keys;
  for (auto cat : {ScenarioCategory::v2v, ScenarioCategory::v2p, ScenarioCategory::v2b}) {
    for (const auto& name : t.type_names(cat)) keys.push_back(FunctionalType{name, cat}.key());
  }
  return keys;
}

struct Prepared {
  TrafficSpace space;
  Recording recording;  // after filtering
  std::size_t total_tracks = 0;
  FilterReport filter;
  LabelTable labels;
};

Prepared prepare(const Run& run) {
  Prepared p;
  p.space = load_space(run.cfg);
  Recording raw = load_input(run.cfg);
  if (!raw.traffic_space_id.empty() && raw.traffic_space_id != p.space.id) {
    run.log << "warning: recording names traffic space '" << raw.traffic_space_id << "', map is '" << p.space.id << "'\n";
  }
  p.total_tracks = raw.tracks.size();
  auto [kept, report] = filter_tracks(raw, filter_rules(run.cfg, raw.frame_rate));
  p.recording = std::move(kept);
  p.filter = std::move(report);
  p.labels = label_recording(p.recording, p.space, labeling_config(run.cfg));
  return p;
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_extract(const Run& run, std::ostream& out) {
  const ExtractionConfig ecfg = extraction_config(run.cfg);
  const bool xosc = run.cfg.get_bool("extraction.openscenario");
  const Prepared p = prepare(run);
  const ExtractionResult result = extract_all(p.recording, p.space, p.labels, ecfg);
  run.open();

  ScenarioDatabase db(run.dir / "scenarios");
  json ids = json::array();
  std::map<std::string, int> by_type;
  int critical = 0;
  for (const auto& s : result.scenarios) {
    ScenarioRecord rec{s, {ScenarioSource::real, version(), run.hash}};
    const std::string id = db.store(rec);
    if (xosc) write_file(run.path("scenarios", id + ".xosc"), export_openscenario(rec));
    ids.push_back(id);
    ++by_type[s.core.functional_type.key()];
    if (s.core.critical) ++critical;
  }

  run.csv("reports", "filter_report.csv", [&](std::ostream& o) { write_filter_report(o, p.filter); });
  run.csv("reports", "labels.csv", [&](std::ostream& o) { write_label_table(o, p.labels); });
  run.csv("reports", "candidates.csv", [&](std::ostream& o) { write_candidates(o, result.candidates); });
  const auto stats = pet_stats(result.scenarios, all_type_keys(ecfg.taxonomy));
  run.csv("reports", "pet_stats.csv", [&](std::ostream& o) { write_pet_stats(o, stats); });

  json unlabeled = json::array();
  for (const auto& row : p.labels.rows) {
    if (!row.label) unlabeled.push_back(row.track_id);
  }
  json maneuvers = json::object();
  for (const auto& [m, n] : p.labels.maneuver_counts) maneuvers[std::string(to_string(m))] = n;
  json doc;
  doc["recording_id"] = p.recording.recording_id;
  doc["tracks_total"] = p.total_tracks;
  doc["tracks_kept"] = p.filter.kept.size();
  doc["tracks_removed"] = p.filter.removed.size();
  doc["unlabeled_tracks"] = unlabeled;
  doc["label_counts"] = p.labels.label_counts;
  doc["maneuver_counts"] = maneuvers;
  doc["candidates"] = result.candidates.size();
  doc["scenarios"] = result.scenarios.size();
  doc["critical"] = critical;
  doc["by_type"] = by_type;
  doc["scenario_ids"] = ids;
  run.json_file("reports", "summary.json", doc);

  run.log << "extract: " << p.filter.kept.size() << "/" << p.total_tracks << " tracks kept, " << result.candidates.size()
          << " candidates, " << result.scenarios.size() << " scenarios\n";
  out << run.dir.string() << "\n";
}

void cmd_simulate(const Run& run, std::ostream& out) {
  const TrafficSpace space = load_space(run.cfg);
  SpawnSpec spawn = parse_spawn_spec(read_file(run.cfg.get_path("sim.spawn"), "sim.spawn"));
  SimConfig sim = sim_config(run.cfg);
  if (run.cfg.has("seed")) {
    spawn.seed = sim.seed;
  } else {
    sim.seed = spawn.seed;
  }
  if (!run.cfg.has("sim.duration")) sim.duration = spawn.duration;
  const ModelParams params = model_params(run.cfg);
  World world = build_world_from_spawn(space, spawn, params);
  const std::size_t agents = world.agents.size();
  const SimLog log = run_scenario(std::move(world), sim);
  run.open();

  run.csv("logs", "sim_log.csv", [&](std::ostream& o) { write_log(o, log); });
  json cols = json::array();
  for (const auto& c : log.collisions) cols.push_back({{"time", c.time}, {"agent_a", c.agent_a}, {"agent_b", c.agent_b}});
  json doc;
  doc["seed"] = sim.seed;
  doc["agents"] = agents;
  doc["frames"] = log.frame_count;
  doc["rows"] = log.rows.size();
  doc["collisions"] = cols;
  run.json_file("reports", "summary.json", doc);

  run.log << "simulate: " << agents << " agents, " << log.frame_count << " frames, " << log.collisions.size()
          << " collisions\n";
  out << run.dir.string() << "\n";
}

void cmd_calibrate(const Run& run, std::ostream& out) {
  const auto& c = run.cfg;
  const ParamSpec spec = ParamSpec::parse(c.get_string("calibrate.params"));
  GAConfig ga;
  ga.population = static_cast<std::size_t>(std::max(0LL, c.get_int("ga.population")));
  ga.generations = static_cast<int>(c.get_int("ga.generations"));
  ga.tournament = static_cast<std::size_t>(std::max(0LL, c.get_int("ga.tournament")));
  ga.crossover_rate = c.get_double("ga.crossover_rate");
  ga.mutation_rate = c.get_double("ga.mutation_rate");
  ga.mutation_sigma = c.get_double("ga.mutation_sigma");
  ga.elitism = static_cast<std::size_t>(std::max(0LL, c.get_int("ga.elitism")));
  ga.threads = threads_of(c, "ga.threads");
  ga.seed = seed_of(c);
  ga.validate();
  const SimConfig sim = sim_config(c);
  const ModelParams base = model_params(c);
  FitnessConfig fc;
  fc.collision_weight = c.get_double("calibrate.collision_weight");
  fc.seed = ga.seed;

  Prepared p = prepare(run);
  const auto max_agents = c.get_int("calibrate.max_agents");
  if (max_agents > 0 && p.recording.tracks.size() > static_cast<std::size_t>(max_agents)) {
    p.recording.tracks.resize(static_cast<std::size_t>(max_agents));
  }

  auto fitness = [&](std::span<const double> x) {
    return evaluate_fitness(spec.apply(base, x), p.recording, p.space, p.labels, sim, fc).fitness;
  };
  auto observer = [&](int gen, const std::vector<std::vector<double>>&) {
    if (gen % 10 == 0) run.log << "calibrate: generation " << gen << "\n";
  };
  const GAResult res = run_ga(spec, ga, fitness, {}, observer);
  const ModelParams best = spec.apply(base, res.best);
  const FitnessReport report = evaluate_fitness(best, p.recording, p.space, p.labels, sim, fc);
  run.open();

  run.csv("reports", "ga_history.csv", [&](std::ostream& o) { write_ga_history(o, res.history); });
  run.csv("logs", "best_sim_log.csv", [&](std::ostream& o) { write_log(o, report.log); });
  json genes = json::object();
  for (std::size_t i = 0; i < spec.size(); ++i) genes[spec.genes[i].name] = res.best[i];
  json doc;
  doc["fitness"] = res.best_fitness;
  doc["genes"] = genes;
  doc["params"] = json::parse(best.to_json());
  run.json_file("reports", "best_params.json", doc);
  json fit;
  fit["fitness"] = report.fitness;
  fit["mean_error"] = report.mean_error;
  fit["collisions"] = report.collisions;
  fit["agents_total"] = report.agents_total;
  fit["agents_evaluated"] = report.agents_evaluated;
  fit["excluded"] = report.excluded;
  fit["excluded_fraction"] = report.excluded_fraction;
  fit["evaluations"] = res.evaluations;
  run.json_file("reports", "fitness.json", fit);

  run.log << "calibrate: best fitness " << res.best_fitness << " after " << res.evaluations << " evaluations, "
          << report.excluded.size() << "/" << report.agents_total << " agents excluded\n";
  out << run.dir.string() << "\n";
}

void cmd_replay(const Run& run, std::ostream& out) {
  const auto& c = run.cfg;
  const TrafficSpace space = load_space(c);
  const ScenarioRecord input = scenario_from_json(read_file(c.get_path("replay.scenario"), "replay.scenario"));
  const ConcreteScenario& scn = input.scenario;
  const auto ego_key = c.get_int("replay.ego");
  const int ego = ego_key ? static_cast<int>(ego_key) : scn.core.ego_track_id;
  const PolicyFactory factory = make_policy_factory(c.get_string("replay.policy"));

  ReplayConfig rc;
  rc.sim = sim_config(c);
  if (rc.sim.frame_rate != scn.frame_rate) {
    if (c.has("sim.frame_rate")) run.log << "warning: sim.frame_rate replaced by the scenario frame rate\n";
    rc.sim.frame_rate = scn.frame_rate;
  }
  rc.dissimilarity.position_weight = c.get_double("replay.position_weight");
  rc.dissimilarity.heading_weight = c.get_double("replay.heading_weight");
  rc.dissimilarity.speed_weight = c.get_double("replay.speed_weight");
  rc.dissimilarity.threshold = c.get_double("replay.threshold");
  rc.params = model_params(c);
  rc.critical_pet = c.get_double("replay.critical_pet");
  rc.audit_rewind = c.get_double("replay.rewind");
  rc.seed = seed_of(c);
  rc.threads = threads_of(c, "replay.threads");
  rc.validate();

  auto policy = factory();
  ReplaySession session = run_adaptive(scn, ego, space, *policy, rc);
  summarize_session(session, scn, rc);
  if (c.get_bool("replay.audit")) false_positive_audit(session, scn, space, factory, rc);
  run.open();

  ScenarioDatabase db(run.dir / "scenarios");
  db.store(session_to_record(session, scn, rc, version(), run.hash));
  run.csv("logs", "session.csv", [&](std::ostream& o) { write_session_csv(o, session); });
  run.csv("reports", "dissimilarity.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    w.row({"frame", "dissimilarity"});
    for (const auto& [frame, d] : session.trace) {
      w.field(frame).field(d);
      w.end_row();
    }
  });
  write_file(run.path("reports", "summary.json"), session_summary_json(session, run.hash, version()));

  const auto n = c.get_int("replay.variations");
  std::vector<ReplaySession> runs;
  if (n > 0 && session.trigger) {
    runs = rewind_and_vary(scn, session, space, factory, rc.audit_rewind,
                           aggressive_variations(static_cast<std::size_t>(n), rc.seed), rc);
  } else if (n > 0) {
    run.log << "replay: no trigger, variations skipped\n";
  }
  for (auto& r : runs) {
    summarize_session(r, scn, rc);
    const std::string name = r.variation.value_or("none");
    run.csv("logs", "variation_" + name + ".csv", [&](std::ostream& o) { write_session_csv(o, r); });
    db.store(session_to_record(r, scn, rc, version(), run.hash));
  }
  run.csv("reports", "variations.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    w.row({"variation", "end_reason", "min_pet", "min_pet_agent", "collisions", "ego_collision"});
    for (const auto& r : runs) {
      bool ego_hit = false;
      for (const auto& col : r.log.collisions) ego_hit = ego_hit || col.agent_a == r.ego_id || col.agent_b == r.ego_id;
      w.field(r.variation.value_or("none")).field(r.end_reason);
      if (r.min_pet) {
        w.field(*r.min_pet);
      } else {
        w.empty_field();
      }
      w.field(r.min_pet_agent).field(r.log.collisions.size()).field(ego_hit ? "true" : "false");
      w.end_row();
    }
  });

  run.log << "replay: ego " << ego << " (" << session.policy_id << "), "
          << (session.trigger ? "switched at frame " + std::to_string(session.trigger->frame) : std::string("no switch"))
          << ", " << session.end_reason << "\n";
  for (const auto& w : session.warnings) run.log << "warning: " << w << "\n";
  out << run.dir.string() << "\n";
}

ScenarioDatabase open_database(const RunConfig& c) {
  const fs::path dir = c.get_path("paths.scenarios");
  if (!fs::exists(dir / "index.json")) throw NotFoundError("paths.scenarios: no scenario index in " + dir.string());
  return ScenarioDatabase(dir);
}

void cmd_stats(const Run& run, std::ostream& out) {
  const ScenarioDatabase db = open_database(run.cfg);
  std::vector<ConcreteScenario> scenarios;
  for (const auto& id : db.ids()) scenarios.push_back(db.load(id).scenario);
  const auto include = run.cfg.get_bool("stats.all_types") ? all_type_keys(Taxonomy::defaults()) : std::vector<std::string>{};
  const auto rows = pet_stats(scenarios, include);
  run.open();
  run.csv("reports", "pet_stats.csv", [&](std::ostream& o) { write_pet_stats(o, rows); });
  json doc;
  doc["scenarios"] = scenarios.size();
  doc["types"] = rows.size();
  run.json_file("reports", "summary.json", doc);
  run.log << "stats: " << scenarios.size() << " scenarios\n";
  out << run.dir.string() << "\n";
}

void cmd_sample(const Run& run, std::ostream& out) {
  const ScenarioDatabase db = open_database(run.cfg);
  const std::string type = run.cfg.get_string("sample.functional_type");
  const auto n = run.cfg.get_int("sample.n");
  if (n < 1) throw ConfigError("config key 'sample.n': expected integer >= 1");
  const LogicalScenario logical = fit_logical(type, db);
  const auto draws = sample_concrete(logical, static_cast<std::size_t>(n), seed_of(run.cfg));
  run.open();

  run.csv("reports", "samples.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    w.row(logical.parameter_names);
    for (const auto& row : draws) {
      for (double v : row) w.field(v);
      w.end_row();
    }
  });
  json params = json::array();
  for (std::size_t i = 0; i < logical.parameter_names.size(); ++i) {
    const auto& m = logical.marginals[i];
    params.push_back({{"name", logical.parameter_names[i]},
                      {"n", m.size()},
                      {"min", m.min()},
                      {"max", m.max()},
                      {"mean", m.mean()},
                      {"median", m.median()},
                      {"variance", m.variance()}});
  }
  json doc;
  doc["functional_type"] = logical.functional_type;
  doc["scenarios"] = logical.table.size();
  doc["parameters"] = params;
  run.json_file("reports", "logical.json", doc);
  run.log << "sample: " << logical.table.size() << " scenarios of " << logical.functional_type << ", " << n
          << " draws\n";
  out << run.dir.string() << "\n";
}

struct Subcommand {
  const char* name;
  const char* help;
  void (*fn)(const Run&, std::ostream&);
};

constexpr Subcommand kSubcommands[] = {
    {"extract", "filter, label and extract intersecting scenarios from a recording", cmd_extract},
    {"simulate", "run the traffic model on spawned agents", cmd_simulate},
    {"calibrate", "fit model parameters to a recording with a genetic algorithm", cmd_calibrate},
    {"replay", "replay a scenario with a substituted ego and switch to simulation on divergence", cmd_replay},
    {"stats", "PET five-number summaries per functional type of a scenario database", cmd_stats},
    {"sample", "fit a logical scenario and draw concrete parameter sets", cmd_sample},
};

void print_keys(std::ostream& out) {
  for (const auto& k : config_keys()) {
    out << std::left << std::setw(30) << k.name << ' ' << std::setw(8) << to_string(k.type) << ' '
        << std::setw(12) << k.default_value.value_or("-") << ' ' << k.help << "\n";
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Intersection scenario extraction, simulation and replay", "junction"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  bool list_keys = false;
  app.add_flag("--version", show_version, "print the version");
  app.add_flag("--list-keys", list_keys, "print every config key with its type and default");

  std::string config_file;
  std::vector<std::string> overrides;
  std::vector<CLI::App*> subs;
  for (const auto& s : kSubcommands) {
    auto* sc = app.add_subcommand(s.name, s.help);
    sc->add_option("-c,--config", config_file, "config file (key = value lines)");
    sc->add_option("-s,--set", overrides, "override a key, e.g. --set seed=7")->allow_extra_args(false);
    subs.push_back(sc);
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kConfigError;
  }
  if (show_version) {
    out << "junction " << version() << "\n";
    return kOk;
  }
  if (list_keys) {
    print_keys(out);
    return kOk;
  }

  const Subcommand* chosen = nullptr;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) chosen = &kSubcommands[i];
  }
  if (!chosen) {
    out << app.help();
    return kConfigError;
  }

  try {
    RunConfig cfg;
    if (!config_file.empty()) cfg = RunConfig::load(config_file);
    for (const auto& o : overrides) cfg.set_override(o);
    const Run run = make_run(cfg, chosen->name, err);
    chosen->fn(run, out);
    return kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const RuntimeAbort& e) {
    err << "runtime abort: " << e.what() << "\n";
    return kRuntimeAbort;
  } catch (const std::exception& e) {
    err << "runtime abort: " << e.what() << "\n";
    return kRuntimeAbort;
  }
}

}  // namespace junction::cli
