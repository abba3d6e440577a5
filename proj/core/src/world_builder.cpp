#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <json.hpp>

#include "junction/extraction.hpp"
#include "junction/hash.hpp"
#include "junction/scenariodb.hpp"
#include "junction/simcore.hpp"

namespace junction {

double draw_preferred_offset(std::uint64_t seed, int agent_id, double sigma, double max_abs) {
  if (sigma <= 0.0 || max_abs <= 0.0) return 0.0;
  std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(static_cast<std::uint32_t>(agent_id) + 1)));
  // Box-Muller on the portable uniform stream; std::normal_distribution differs between libraries.
  const double u1 = 1.0 - unit_uniform(rng());
  const double u2 = unit_uniform(rng());
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return std::clamp(sigma * z, -max_abs, max_abs);
}

namespace {

double lane_cap(const Route& route, double s, double width) {
  return std::max(0.0, 0.5 * (route.width_at(s) - width) - 0.15);
}

void apply_dimensions(Agent& a, const Track* track, const ModelParams& params) {
  if (a.kind == AgentKind::pedestrian) {
    a.length = 0.0;
    a.width = 0.0;
    return;
  }
  const auto& vp = params.vehicle(a.kind);
  a.length = track && track->length > 0.0 ? track->length : vp.length;
  a.width = track && track->width > 0.0 ? track->width : vp.width;
}

}  // namespace

std::optional<Agent> agent_from_track(const Track& track, const std::optional<BranchLabel>& label,
                                      const TrafficSpace& space, double frame_rate, const ModelParams& params,
                                      std::uint64_t seed, const SeedOptions& opt) {
  if (track.samples.empty()) return std::nullopt;
  Agent a;
  a.id = track.track_id;
  a.kind = track.kind;
  apply_dimensions(a, &track, params);
  const auto& first = track.samples.front();

  std::optional<Route> route;
  if (label) {
    const auto lanes = space.route_lanes(label->entry, label->exit, track.kind);
    if (!lanes.empty()) {
      Route r = Route::from_lanes(space, lanes, track.kind);
      const auto pr = r.path().project(first.position);
      if (pr.distance <= r.width_at(pr.s) * 1.5) route = std::move(r);
    }
  }
  if (!route) {
    if (!opt.use_recorded_path_fallback) return std::nullopt;
    const Polyline path = path_of(track, 0.5);
    if (path.size() < 2 || path.length() < 1.0) return std::nullopt;
    // Extend past the last sample so the agent leaves the scene instead of stopping.
    std::vector<Vec2> pts = path.points();
    pts.push_back(path.extrapolate(path.length() + 30.0));
    route = Route::from_polyline(Polyline(std::move(pts)), a.kind == AgentKind::pedestrian ? 2.0 : 3.5);
  }
  a.route = std::move(*route);

  AgentState& s = a.state;
  s.position = first.position;
  s.heading = first.heading;
  s.velocity = first.velocity;
  s.speed = first.velocity.norm();
  s.mode = AgentMode::agent;
  const auto pr = a.route.path().project(first.position);
  s.s = pr.s;
  if (a.kind != AgentKind::pedestrian) {
    const double cap = lane_cap(a.route, pr.s, a.width);
    s.lateral = std::clamp(pr.lateral, -cap, cap);
    s.preferred_offset = draw_preferred_offset(seed, a.id, params.vehicle(a.kind).lateral_sigma, cap);
  }
  a.spawn_time = static_cast<double>(track.initial_frame) / frame_rate;
  a.recorded = track;
  a.committed.assign(a.route.yields().size(), false);
  return a;
}

SpawnSpec parse_spawn_spec(const std::string& json_text) {
  SpawnSpec spec;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    spec.duration = doc.value("duration", 60.0);
    spec.seed = doc.value("seed", std::uint64_t{1});
    for (std::size_t i = 0; i < doc.at("routes").size(); ++i) {
      const auto& r = doc.at("routes")[i];
      SpawnRoute sr;
      sr.entry = r.at("entry").get<std::string>();
      sr.exit = r.at("exit").get<std::string>();
      const auto kind = parse_agent_kind(r.value("kind", std::string("car")));
      if (!kind) throw ConfigError("spawn spec: routes[" + std::to_string(i) + "].kind is not a known agent kind");
      sr.kind = *kind;
      sr.rate = r.value("rate", 0.1);
      if (!(sr.rate > 0.0)) throw ConfigError("spawn spec: routes[" + std::to_string(i) + "].rate must be positive");
      spec.routes.push_back(sr);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("spawn spec: ") + e.what());
  }
  return spec;
}

World build_world_from_spawn(const TrafficSpace& space, const SpawnSpec& spec, const ModelParams& params) {
  struct Arrival {
    double time;
    std::size_t route;
  };
  std::vector<Arrival> arrivals;
  std::vector<Route> routes;
  for (std::size_t k = 0; k < spec.routes.size(); ++k) {
    const auto& sr = spec.routes[k];
    const auto lanes = space.route_lanes(sr.entry, sr.exit, sr.kind);
    if (lanes.empty()) {
      throw ConfigError("spawn spec: routes[" + std::to_string(k) + "] has no lane path from " + sr.entry + " to " + sr.exit);
    }
    routes.push_back(Route::from_lanes(space, lanes, sr.kind));
    std::mt19937_64 rng(spec.seed + 0x632be59bd9b4e019ull * (k + 1));
    double t = 0.0;
    while (true) {
      t += -std::log(1.0 - unit_uniform(rng())) / sr.rate;
      if (t > spec.duration) break;
      arrivals.push_back({t, k});
    }
  }
  std::sort(arrivals.begin(), arrivals.end(), [](const Arrival& a, const Arrival& b) {
    return a.time != b.time ? a.time < b.time : a.route < b.route;
  });

  World world;
  world.space = &space;
  world.params = params;
  int next_id = 1;
  for (const auto& arr : arrivals) {
    const auto& sr = spec.routes[arr.route];
    Agent a;
    a.id = next_id++;
    a.kind = sr.kind;
    apply_dimensions(a, nullptr, params);
    a.route = routes[arr.route];
    a.spawn_time = arr.time;
    a.wait_for_clear_spawn = true;
    AgentState& s = a.state;
    const double s0 = a.kind == AgentKind::pedestrian ? 0.0 : 0.5 * a.length;
    s.s = s0;
    s.heading = a.route.path().heading_at(s0);
    if (a.kind == AgentKind::pedestrian) {
      s.speed = params.pedestrian.v0;
    } else {
      const auto& vp = params.vehicle(a.kind);
      const double cap = lane_cap(a.route, s0, a.width);
      s.preferred_offset = draw_preferred_offset(spec.seed, a.id, vp.lateral_sigma, cap);
      s.lateral = s.preferred_offset;
      s.speed = 0.8 * std::min(vp.v0, a.route.speed_limit_at(s0));
    }
    s.position = a.route.path().point_at(s0) + a.route.path().tangent_at(s0).left() * s.lateral;
    s.velocity = Vec2::from_angle(s.heading) * s.speed;
    a.committed.assign(a.route.yields().size(), false);
    world.agents.push_back(std::move(a));
  }
  return world;
}

}  // namespace junction
