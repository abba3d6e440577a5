#include "junction/traffic_space.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace junction {

namespace {

using nlohmann::json;

const char* const kCompass[] = {"E", "NE", "N", "NW", "W", "SW", "S", "SE"};

[[noreturn]] void schema_error(const std::string& field, const std::string& msg) {
  throw ConfigError("traffic space: " + field + ": " + msg);
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) schema_error(path + "." + key, "missing");
  return obj.at(key);
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  return v.get<double>();
}

Vec2 as_point(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) schema_error(path, "expected [x, y]");
  return {as_number(v[0], path + "[0]"), as_number(v[1], path + "[1]")};
}

std::vector<Vec2> as_points(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array of points");
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_point(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::set<AgentKind> as_kinds(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array of agent kinds");
  std::set<AgentKind> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) schema_error(path + "[" + std::to_string(i) + "]", "expected a string");
    const auto k = parse_agent_kind(v[i].get<std::string>());
    if (!k) schema_error(path + "[" + std::to_string(i) + "]", "unknown agent kind '" + v[i].get<std::string>() + "'");
    out.insert(*k);
  }
  return out;
}

std::optional<std::pair<double, double>> segment_intersection(Vec2 p, Vec2 p2, Vec2 q, Vec2 q2) {
  const Vec2 r = p2 - p;
  const Vec2 s = q2 - q;
  const double denom = r.cross(s);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = (q - p).cross(s) / denom;
  const double u = (q - p).cross(r) / denom;
  if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return std::make_pair(t, u);
}

// Total heading change along a lane, positive for left turns.
double lane_turn(const Lane& lane) {
  const auto& c = lane.centerline;
  return wrap_angle(c.heading_at(c.length()) - c.heading_at(0.0));
}

}  // namespace

bool is_compass_label(const std::string& label) {
  return std::find(std::begin(kCompass), std::end(kCompass), label) != std::end(kCompass);
}

double compass_angle(const std::string& label) {
  for (int i = 0; i < 8; ++i) {
    if (label == kCompass[i]) return wrap_angle(i * std::numbers::pi / 4.0);
  }
  throw ConfigError("not a compass label: '" + label + "'");
}

const Lane* TrafficSpace::lane(const std::string& lane_id) const {
  auto it = lane_index_.find(lane_id);
  if (it != lane_index_.end()) return &lanes[it->second];
  for (const auto& l : lanes) {
    if (l.id == lane_id) return &l;
  }
  return nullptr;
}

const Lane& TrafficSpace::lane_or_throw(const std::string& lane_id) const {
  const Lane* l = lane(lane_id);
  if (!l) throw ConfigError("traffic space " + id + ": unknown lane '" + lane_id + "'");
  return *l;
}

std::vector<const ReferencePoint*> TrafficSpace::reference_points_for(AgentKind kind) const {
  std::vector<const ReferencePoint*> out;
  for (const auto& rp : reference_points) {
    if (rp.kinds.contains(kind)) out.push_back(&rp);
  }
  return out;
}

std::optional<std::pair<const ReferencePoint*, double>> TrafficSpace::nearest_reference(Vec2 p, AgentKind kind) const {
  const ReferencePoint* best = nullptr;
  double best_d = 0.0;
  for (const auto& rp : reference_points) {
    if (!rp.kinds.contains(kind)) continue;
    const double d = distance(p, rp.position);
    if (!best || d < best_d || (d == best_d && rp.label < best->label)) {
      best = &rp;
      best_d = d;
    }
  }
  if (!best) return std::nullopt;
  return std::make_pair(best, best_d);
}

void TrafficSpace::finalize() {
  lane_index_.clear();
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const auto& l = lanes[i];
    const std::string path = "lanes[" + std::to_string(i) + "]";
    if (l.id.empty()) schema_error(path + ".id", "must be non-empty");
    if (l.centerline.size() < 2) schema_error(path + ".centerline", "polyline needs at least 2 distinct points");
    if (!(l.width > 0.0)) schema_error(path + ".width", "must be positive");
    if (!(l.speed_limit > 0.0)) schema_error(path + ".speed_limit", "must be positive");
    if (l.yield_s && (*l.yield_s < 0.0 || *l.yield_s > l.centerline.length())) {
      schema_error(path + ".yield_s", "outside the lane");
    }
    if (!lane_index_.emplace(l.id, i).second) schema_error(path + ".id", "duplicate lane id '" + l.id + "'");
  }
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    for (const auto& succ : lanes[i].successors) {
      if (!lane_index_.contains(succ)) {
        schema_error("lanes[" + std::to_string(i) + "].successors", "unknown lane '" + succ + "'");
      }
    }
  }
  for (std::size_t i = 0; i < reference_points.size(); ++i) {
    const auto& rp = reference_points[i];
    const std::string path = "reference_points[" + std::to_string(i) + "]";
    if (!is_compass_label(rp.label)) schema_error(path + ".label", "'" + rp.label + "' is not a compass label");
    if (rp.kinds.empty()) schema_error(path + ".kinds", "must be non-empty");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& other = reference_points[j];
      if (other.label != rp.label) continue;
      for (auto k : rp.kinds) {
        if (other.kinds.contains(k)) {
          schema_error(path + ".label", "duplicate label '" + rp.label + "' for kind " + std::string(to_string(k)));
        }
      }
    }
  }
  for (std::size_t i = 0; i < crosswalks.size(); ++i) {
    if (crosswalks[i].size() < 3) schema_error("crosswalks[" + std::to_string(i) + "]", "polygon needs at least 3 vertices");
  }

  conflicts_.clear();
  auto carries_vehicles = [](const Lane& l) {
    return std::any_of(l.kinds.begin(), l.kinds.end(), [](AgentKind k) { return k != AgentKind::pedestrian; });
  };
  auto shares_origin = [](const Lane& a, const Lane& b) {
    return distance(a.centerline.points().front(), b.centerline.points().front()) < 0.5;
  };
  auto connected = [&](const Lane& a, const Lane& b) {
    return std::find(a.successors.begin(), a.successors.end(), b.id) != a.successors.end() ||
           std::find(b.successors.begin(), b.successors.end(), a.id) != b.successors.end();
  };
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    for (std::size_t j = i + 1; j < lanes.size(); ++j) {
      const Lane& a = lanes[i];
      const Lane& b = lanes[j];
      if (connected(a, b)) continue;
      const auto& pa = a.centerline.points();
      const auto& pb = b.centerline.points();
      bool found_merge = false;
      for (std::size_t u = 0; u + 1 < pa.size(); ++u) {
        for (std::size_t v = 0; v + 1 < pb.size(); ++v) {
          auto hit = segment_intersection(pa[u], pa[u + 1], pb[v], pb[v + 1]);
          if (!hit) continue;
          const double sa = a.centerline.arc_length_at_vertex(u) + hit->first * distance(pa[u], pa[u + 1]);
          const double sb = b.centerline.arc_length_at_vertex(v) + hit->second * distance(pb[v], pb[v + 1]);
          const bool a_start = sa < 0.5, b_start = sb < 0.5;
          const bool a_end = sa > a.centerline.length() - 0.5, b_end = sb > b.centerline.length() - 0.5;
          if (a_start && b_start) continue;  // diverging from a shared origin
          LaneConflict c{a.id, b.id, sa, sb, pa[u] + (pa[u + 1] - pa[u]) * hit->first, LaneConflict::Type::crossing};
          if (a_end && b_end) {
            if (found_merge) continue;
            c.type = LaneConflict::Type::merge;
            found_merge = true;
          }
          // Skip duplicates reported by adjacent segments sharing a vertex.
          const bool dup = std::any_of(conflicts_.begin(), conflicts_.end(), [&](const LaneConflict& o) {
            return o.lane_a == c.lane_a && o.lane_b == c.lane_b && std::abs(o.s_a - c.s_a) < 1e-6;
          });
          if (!dup) conflicts_.push_back(c);
        }
      }
      const bool crossed = std::any_of(conflicts_.begin(), conflicts_.end(), [&](const LaneConflict& o) {
        return o.lane_a == a.id && o.lane_b == b.id;
      });
      if (!crossed && !found_merge && carries_vehicles(a) && carries_vehicles(b) && !shares_origin(a, b)) {
        // Centerlines that pass closer than a vehicle can clear without crossing.
        const double limit = 0.5 * (a.width + b.width) - 0.5;
        double best = limit, best_sa = 0.0, best_sb = 0.0;
        for (double sa = 0.0; sa <= a.centerline.length(); sa += 0.25) {
          const auto pr = b.centerline.project(a.centerline.point_at(sa));
          if (pr.distance < best) {
            best = pr.distance;
            best_sa = sa;
            best_sb = pr.s;
          }
        }
        if (best < limit) {
          conflicts_.push_back({a.id, b.id, best_sa, best_sb,
                                (a.centerline.point_at(best_sa) + b.centerline.point_at(best_sb)) * 0.5,
                                LaneConflict::Type::crossing});
        }
      }
      if (!found_merge) {
        for (const auto& sa : a.successors) {
          if (std::find(b.successors.begin(), b.successors.end(), sa) != b.successors.end()) {
            LaneConflict c{a.id, b.id, a.centerline.length(), b.centerline.length(),
                           lane_or_throw(sa).centerline.point_at(0.0), LaneConflict::Type::merge};
            conflicts_.push_back(c);
            break;
          }
        }
      }
    }
  }
  compute_zones();
}

namespace {

// Arc-length interval around s0 on `a` within `reach` of `b`'s centerline.
std::pair<double, double> shared_stretch(const Lane& a, double s0, const Lane& b, double reach) {
  constexpr double step = 0.25;
  auto near = [&](double s) { return b.centerline.project(a.centerline.point_at(s)).distance < reach; };
  double lo = s0, hi = s0;
  while (lo > 0.0 && near(std::max(0.0, lo - step))) lo = std::max(0.0, lo - step);
  while (hi < a.centerline.length() && near(std::min(a.centerline.length(), hi + step))) {
    hi = std::min(a.centerline.length(), hi + step);
  }
  return {lo, hi};
}

}  // namespace

void TrafficSpace::compute_zones() {
  for (auto& c : conflicts_) {
    const Lane& a = lane_or_throw(c.lane_a);
    const Lane& b = lane_or_throw(c.lane_b);
    const double reach = 0.5 * (a.width + b.width) + 0.5;
    std::tie(c.a_in, c.a_out) = shared_stretch(a, c.s_a, b, reach);
    std::tie(c.b_in, c.b_out) = shared_stretch(b, c.s_b, a, reach);
  }
}

bool TrafficSpace::yields_to(const std::string& a_id, const std::string& b_id) const {
  const Lane& a = lane_or_throw(a_id);
  const Lane& b = lane_or_throw(b_id);
  if (a.priority_rank != b.priority_rank) return a.priority_rank > b.priority_rank;
  const LaneConflict* conflict = nullptr;
  for (const auto& c : conflicts_) {
    if ((c.lane_a == a_id && c.lane_b == b_id) || (c.lane_a == b_id && c.lane_b == a_id)) {
      conflict = &c;
      break;
    }
  }
  if (!conflict) return false;
  const double s_a = conflict->lane_a == a_id ? conflict->s_a : conflict->s_b;
  const double s_b = conflict->lane_a == a_id ? conflict->s_b : conflict->s_a;
  const Vec2 dir_a = a.centerline.tangent_at(std::max(0.0, s_a - 10.0));
  const Vec2 dir_b = b.centerline.tangent_at(std::max(0.0, s_b - 10.0));
  const double side = dir_a.cross(dir_b);
  if (std::abs(side) > 0.3) return side > 0.0;  // b approaches from a's right
  if (dir_a.dot(dir_b) < 0.0) {
    // Oncoming: the left-turning lane gives way.
    const bool a_left = lane_turn(a) > std::numbers::pi / 4.0;
    const bool b_left = lane_turn(b) > std::numbers::pi / 4.0;
    if (a_left != b_left) return a_left;
  }
  return a_id > b_id;
}

std::vector<std::string> TrafficSpace::route_lanes(const std::string& entry, const std::string& exit,
                                                   AgentKind kind) const {
  std::set<std::string> has_pred;
  for (const auto& l : lanes) {
    for (const auto& s : l.successors) has_pred.insert(s);
  }
  auto usable = [&](const Lane& l) { return l.kinds.contains(kind); };
  auto label_near = [&](Vec2 p) -> std::string {
    // Lanes are matched to branches with the vehicle reference set when the kind has none.
    auto n = nearest_reference(p, kind);
    if (!n) n = nearest_reference(p, AgentKind::car);
    return n ? n->first->label : std::string{};
  };
  std::vector<std::string> starts;
  for (const auto& l : lanes) {
    if (usable(l) && !has_pred.contains(l.id) && label_near(l.centerline.point_at(0.0)) == entry) {
      starts.push_back(l.id);
    }
  }
  std::sort(starts.begin(), starts.end());
  std::deque<std::vector<std::string>> queue;
  for (const auto& s : starts) queue.push_back({s});
  std::set<std::string> seen(starts.begin(), starts.end());
  while (!queue.empty()) {
    auto path = std::move(queue.front());
    queue.pop_front();
    const Lane& last = lane_or_throw(path.back());
    if (last.successors.empty()) {
      if (label_near(last.centerline.point_at(last.centerline.length())) == exit) return path;
      continue;
    }
    auto succ = last.successors;
    std::sort(succ.begin(), succ.end());
    for (const auto& s : succ) {
      if (seen.contains(s) || !usable(lane_or_throw(s))) continue;
      seen.insert(s);
      auto next = path;
      next.push_back(s);
      queue.push_back(std::move(next));
    }
  }
  return {};
}

TrafficSpace parse_traffic_space(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("traffic space: invalid JSON: ") + e.what());
  }
  TrafficSpace space;
  const auto& id = require(doc, "id", "$");
  if (!id.is_string()) schema_error("$.id", "expected a string");
  space.id = id.get<std::string>();

  const auto& lanes = require(doc, "lanes", "$");
  if (!lanes.is_array()) schema_error("$.lanes", "expected an array");
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const auto& l = lanes[i];
    const std::string path = "lanes[" + std::to_string(i) + "]";
    Lane lane;
    const auto& lid = require(l, "id", path);
    if (!lid.is_string()) schema_error(path + ".id", "expected a string");
    lane.id = lid.get<std::string>();
    const auto pts = as_points(require(l, "centerline", path), path + ".centerline");
    if (pts.size() < 2) schema_error(path + ".centerline", "polyline needs at least 2 points");
    lane.centerline = Polyline(pts);
    lane.width = as_number(require(l, "width", path), path + ".width");
    lane.speed_limit = as_number(require(l, "speed_limit", path), path + ".speed_limit");
    const auto& rank = require(l, "priority_rank", path);
    if (!rank.is_number_integer()) schema_error(path + ".priority_rank", "expected an integer");
    lane.priority_rank = rank.get<int>();
    if (l.contains("successors")) {
      const auto& succ = l.at("successors");
      if (!succ.is_array()) schema_error(path + ".successors", "expected an array");
      for (const auto& s : succ) {
        if (!s.is_string()) schema_error(path + ".successors", "expected lane id strings");
        lane.successors.push_back(s.get<std::string>());
      }
    }
    if (l.contains("yield_s") && !l.at("yield_s").is_null()) {
      lane.yield_s = as_number(l.at("yield_s"), path + ".yield_s");
    }
    if (l.contains("kinds")) {
      lane.kinds = as_kinds(l.at("kinds"), path + ".kinds");
    } else {
      lane.kinds = {AgentKind::car, AgentKind::truck, AgentKind::bus, AgentKind::bicycle};
    }
    space.lanes.push_back(std::move(lane));
  }

  if (doc.contains("crosswalks")) {
    const auto& cws = doc.at("crosswalks");
    if (!cws.is_array()) schema_error("$.crosswalks", "expected an array");
    for (std::size_t i = 0; i < cws.size(); ++i) {
      space.crosswalks.push_back(as_points(cws[i], "crosswalks[" + std::to_string(i) + "]"));
    }
  }

  const auto& rps = require(doc, "reference_points", "$");
  if (!rps.is_array()) schema_error("$.reference_points", "expected an array");
  for (std::size_t i = 0; i < rps.size(); ++i) {
    const std::string path = "reference_points[" + std::to_string(i) + "]";
    ReferencePoint rp;
    const auto& label = require(rps[i], "label", path);
    if (!label.is_string()) schema_error(path + ".label", "expected a string");
    rp.label = label.get<std::string>();
    rp.position = as_point(require(rps[i], "xy", path), path + ".xy");
    rp.kinds = as_kinds(require(rps[i], "kinds", path), path + ".kinds");
    space.reference_points.push_back(std::move(rp));
  }
  space.finalize();
  return space;
}

TrafficSpace load_traffic_space(const std::filesystem::path& map_file) {
  std::ifstream in(map_file);
  if (!in) throw ConfigError("cannot open map file " + map_file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_traffic_space(buf.str());
}

std::string traffic_space_to_json(const TrafficSpace& space) {
  json doc;
  doc["id"] = space.id;
  auto pts = [](const std::vector<Vec2>& v) {
    json a = json::array();
    for (const auto& p : v) a.push_back({p.x, p.y});
    return a;
  };
  auto kinds = [](const std::set<AgentKind>& ks) {
    json a = json::array();
    for (auto k : ks) a.push_back(std::string(to_string(k)));
    return a;
  };
  doc["lanes"] = json::array();
  for (const auto& l : space.lanes) {
    json j;
    j["id"] = l.id;
    j["centerline"] = pts(l.centerline.points());
    j["width"] = l.width;
    j["speed_limit"] = l.speed_limit;
    j["priority_rank"] = l.priority_rank;
    j["successors"] = l.successors;
    if (l.yield_s) j["yield_s"] = *l.yield_s;
    j["kinds"] = kinds(l.kinds);
    doc["lanes"].push_back(j);
  }
  doc["crosswalks"] = json::array();
  for (const auto& c : space.crosswalks) doc["crosswalks"].push_back(pts(c));
  doc["reference_points"] = json::array();
  for (const auto& rp : space.reference_points) {
    doc["reference_points"].push_back({{"label", rp.label}, {"xy", {rp.position.x, rp.position.y}}, {"kinds", kinds(rp.kinds)}});
  }
  return doc.dump(2);
}

}  // namespace junction
