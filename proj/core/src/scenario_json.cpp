#include <sstream>

#include <json.hpp>

#include "junction/scenariodb.hpp"

namespace junction {

using nlohmann::json;

std::string_view to_string(ScenarioSource s) {
  switch (s) {
    case ScenarioSource::real: return "real";
    case ScenarioSource::synthetic: return "synthetic";
    case ScenarioSource::sampled: return "sampled";
  }
  return "real";
}

std::optional<ScenarioSource> parse_source(std::string_view text) {
  if (text == "real") return ScenarioSource::real;
  if (text == "synthetic") return ScenarioSource::synthetic;
  if (text == "sampled") return ScenarioSource::sampled;
  return std::nullopt;
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json occupancy_json(const std::optional<Occupancy>& o) {
  if (!o) return nullptr;
  return {{"enter_time", o->enter_time}, {"exit_time", o->exit_time}, {"first_frame", o->first_frame},
          {"last_frame", o->last_frame}};
}

std::optional<Occupancy> occupancy_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  Occupancy o;
  o.enter_time = j.at("enter_time").get<double>();
  o.exit_time = j.at("exit_time").get<double>();
  o.first_frame = j.at("first_frame").get<long long>();
  o.last_frame = j.at("last_frame").get<long long>();
  return o;
}

json polygon_json(const Polygon& p) {
  json a = json::array();
  for (const auto& v : p) a.push_back({v.x, v.y});
  return a;
}

Polygon polygon_from(const json& j) {
  Polygon p;
  for (const auto& v : j) p.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
  return p;
}

std::optional<double> number_or_null(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

std::string scenario_to_json(const ScenarioRecord& record, int indent) {
  const auto& s = record.scenario;
  const auto& c = s.core;
  json doc;
  doc["meta"] = {{"recording_id", s.recording_id},
                 {"space_id", s.traffic_space_id},
                 {"frame_rate", s.frame_rate},
                 {"source", std::string(to_string(record.provenance.source))},
                 {"pipeline_version", record.provenance.pipeline_version},
                 {"config_hash", record.provenance.config_hash}};
  json core;
  core["ego"] = c.ego_track_id;
  core["challenger"] = c.challenger_track_id;
  core["category"] = std::string(to_string(c.category));
  core["functional_type"] = c.functional_type.name;
  core["pet"] = optional_number(c.pet.pet);
  core["window"] = {c.window_start, c.window_end};
  core["critical"] = c.critical;
  core["pet_detail"] = {{"first_agent", c.pet.first_agent},
                        {"exit_time", c.pet.exit_time},
                        {"entry_time", c.pet.entry_time},
                        {"collision", c.pet.collision},
                        {"reason", c.pet.reason},
                        {"ego_occupancy", occupancy_json(c.pet.a_occupancy)},
                        {"challenger_occupancy", occupancy_json(c.pet.b_occupancy)}};
  if (c.conflict) {
    core["conflict"] = {{"polygon", polygon_json(c.conflict->polygon)},
                        {"ego_s", c.conflict->a_path_s},
                        {"challenger_s", c.conflict->b_path_s}};
  } else {
    core["conflict"] = nullptr;
  }
  core["ego_distance_to_conflict"] = c.ego_distance_to_conflict;
  core["challenger_distance_to_conflict"] = c.challenger_distance_to_conflict;
  doc["core"] = std::move(core);

  json parts = json::array();
  for (const auto& t : s.participants) {
    json p;
    p["track_id"] = t.track_id;
    p["kind"] = std::string(to_string(t.kind));
    p["width"] = t.width;
    p["length"] = t.length;
    p["repaired_frames"] = t.repaired_frames;
    if (auto it = s.labels.find(t.track_id); it != s.labels.end()) {
      p["label"] = {{"entry", it->second.entry}, {"exit", it->second.exit}};
    } else {
      p["label"] = nullptr;
    }
    json samples = json::array();
    for (const auto& smp : t.samples) {
      samples.push_back({{"frame", smp.frame},
                         {"x", smp.position.x},
                         {"y", smp.position.y},
                         {"heading", smp.heading},
                         {"vx", smp.velocity.x},
                         {"vy", smp.velocity.y},
                         {"ax", smp.acceleration.x},
                         {"ay", smp.acceleration.y}});
    }
    p["samples"] = std::move(samples);
    parts.push_back(std::move(p));
  }
  doc["participants"] = std::move(parts);
  return doc.dump(indent);
}

ScenarioRecord scenario_from_json(const std::string& text) {
  ScenarioRecord rec;
  try {
    const json doc = json::parse(text);
    const auto& meta = doc.at("meta");
    auto& s = rec.scenario;
    s.recording_id = meta.at("recording_id").get<int>();
    s.traffic_space_id = meta.at("space_id").get<std::string>();
    s.frame_rate = meta.value("frame_rate", 25.0);
    const auto source = parse_source(meta.at("source").get<std::string>());
    if (!source) throw DataError("scenario: unknown source '" + meta.at("source").get<std::string>() + "'");
    rec.provenance.source = *source;
    rec.provenance.pipeline_version = meta.at("pipeline_version").get<std::string>();
    rec.provenance.config_hash = meta.at("config_hash").get<std::string>();

    const auto& core = doc.at("core");
    auto& c = s.core;
    c.ego_track_id = core.at("ego").get<int>();
    c.challenger_track_id = core.at("challenger").get<int>();
    const auto cat = parse_category(core.at("category").get<std::string>());
    if (!cat) throw DataError("scenario: unknown category");
    c.category = *cat;
    c.functional_type = {core.at("functional_type").get<std::string>(), *cat};
    c.pet.pet = number_or_null(core.at("pet"));
    c.window_start = core.at("window").at(0).get<long long>();
    c.window_end = core.at("window").at(1).get<long long>();
    c.critical = core.value("critical", false);
    if (core.contains("pet_detail")) {
      const auto& d = core.at("pet_detail");
      c.pet.first_agent = d.at("first_agent").get<int>();
      c.pet.exit_time = d.at("exit_time").get<double>();
      c.pet.entry_time = d.at("entry_time").get<double>();
      c.pet.collision = d.at("collision").get<bool>();
      c.pet.reason = d.at("reason").get<std::string>();
      c.pet.a_occupancy = occupancy_from(d.at("ego_occupancy"));
      c.pet.b_occupancy = occupancy_from(d.at("challenger_occupancy"));
    }
    if (core.contains("conflict") && !core.at("conflict").is_null()) {
      const auto& a = core.at("conflict");
      c.conflict = ConflictArea{polygon_from(a.at("polygon")), a.at("ego_s").get<double>(),
                                a.at("challenger_s").get<double>()};
    }
    c.ego_distance_to_conflict = core.value("ego_distance_to_conflict", 0.0);
    c.challenger_distance_to_conflict = core.value("challenger_distance_to_conflict", 0.0);

    for (const auto& p : doc.at("participants")) {
      Track t;
      t.track_id = p.at("track_id").get<int>();
      const auto kind = parse_agent_kind(p.at("kind").get<std::string>());
      if (!kind) throw DataError("scenario: unknown participant kind");
      t.kind = *kind;
      t.width = p.at("width").get<double>();
      t.length = p.at("length").get<double>();
      t.repaired_frames = p.value("repaired_frames", 0);
      if (p.contains("label") && !p.at("label").is_null()) {
        s.labels[t.track_id] = {p.at("label").at("entry").get<std::string>(), p.at("label").at("exit").get<std::string>()};
      }
      for (const auto& smp : p.at("samples")) {
        TrackSample ts;
        ts.frame = smp.at("frame").get<long long>();
        ts.position = {smp.at("x").get<double>(), smp.at("y").get<double>()};
        ts.heading = smp.at("heading").get<double>();
        ts.velocity = {smp.at("vx").get<double>(), smp.at("vy").get<double>()};
        ts.acceleration = {smp.value("ax", 0.0), smp.value("ay", 0.0)};
        t.samples.push_back(ts);
      }
      if (t.samples.empty()) {
        t.initial_frame = 0;
        t.final_frame = -1;
      } else {
        t.initial_frame = t.samples.front().frame;
        t.final_frame = t.samples.back().frame;
      }
      s.participants.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("scenario JSON: ") + e.what());
  }
  return rec;
}

std::string export_openscenario(const ScenarioRecord& record) {
  const auto& s = record.scenario;
  std::ostringstream x;
  x.precision(17);
  x << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  x << "<OpenSCENARIO>\n";
  x << "  <FileHeader revMajor=\"1\" revMinor=\"0\" description=\"" << to_string(s.core.category) << " "
    << s.core.functional_type.name << " recording " << s.recording_id << "\" author=\"junction\"/>\n";
  x << "  <RoadNetwork><LogicFile filepath=\"" << s.traffic_space_id << "\"/></RoadNetwork>\n";
  x << "  <Entities>\n";
  for (const auto& t : s.participants) {
    x << "    <ScenarioObject name=\"agent_" << t.track_id << "\">\n";
    if (t.kind == AgentKind::pedestrian) {
      x << "      <Pedestrian name=\"" << to_string(t.kind) << "\" pedestrianCategory=\"pedestrian\" mass=\"75\"/>\n";
    } else {
      x << "      <Vehicle name=\"" << to_string(t.kind) << "\" vehicleCategory=\"" << to_string(t.kind) << "\">\n";
      x << "        <BoundingBox><Dimensions width=\"" << t.width << "\" length=\"" << t.length
        << "\" height=\"1.5\"/></BoundingBox>\n";
      x << "      </Vehicle>\n";
    }
    x << "    </ScenarioObject>\n";
  }
  x << "  </Entities>\n";
  x << "  <Storyboard>\n    <Init><Actions>\n";
  for (const auto& t : s.participants) {
    if (t.samples.empty()) continue;
    const auto& f = t.samples.front();
    x << "      <Private entityRef=\"agent_" << t.track_id << "\"><PrivateAction><TeleportAction><Position>"
      << "<WorldPosition x=\"" << f.position.x << "\" y=\"" << f.position.y << "\" h=\"" << f.heading
      << "\"/></Position></TeleportAction></PrivateAction></Private>\n";
  }
  x << "    </Actions></Init>\n";
  x << "    <Story name=\"replay\"><Act name=\"act\"><ManeuverGroup name=\"followers\" maximumExecutionCount=\"1\">\n";
  const double t0 = static_cast<double>(s.core.window_start) / s.frame_rate;
  for (const auto& t : s.participants) {
    x << "      <Actors><EntityRef entityRef=\"agent_" << t.track_id << "\"/></Actors>\n";
    x << "      <Maneuver name=\"follow_" << t.track_id << "\"><Event name=\"start\" priority=\"overwrite\"><Action name=\"traj\">"
      << "<PrivateAction><RoutingAction><FollowTrajectoryAction><Trajectory name=\"track_" << t.track_id
      << "\" closed=\"false\"><Shape><Polyline>\n";
    for (const auto& smp : t.samples) {
      x << "        <Vertex time=\"" << static_cast<double>(smp.frame) / s.frame_rate - t0 << "\"><Position><WorldPosition x=\""
        << smp.position.x << "\" y=\"" << smp.position.y << "\" h=\"" << smp.heading << "\"/></Position></Vertex>\n";
    }
    x << "      </Polyline></Shape></Trajectory><TimeReference><Timing domainAbsoluteRelative=\"relative\" scale=\"1\" "
         "offset=\"0\"/></TimeReference></FollowTrajectoryAction></RoutingAction></PrivateAction></Action></Event>"
         "</Maneuver>\n";
  }
  x << "    </ManeuverGroup></Act></Story>\n  </Storyboard>\n</OpenSCENARIO>\n";
  return x.str();
}

}  // namespace junction
