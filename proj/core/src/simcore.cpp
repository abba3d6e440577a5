#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "junction/csv.hpp"
#include "junction/extraction.hpp"
#include "junction/simcore.hpp"

namespace junction {

std::string_view to_string(Integrator i) { return i == Integrator::heun ? "heun" : "euler"; }

std::optional<Integrator> parse_integrator(std::string_view text) {
  if (text == "euler") return Integrator::euler;
  if (text == "heun") return Integrator::heun;
  return std::nullopt;
}

std::string_view to_string(AgentMode m) { return m == AgentMode::replayed ? "replayed" : "agent"; }

void SimConfig::validate() const {
  if (!(frame_rate > 0.0)) throw ConfigError("sim.frame_rate: expected a positive number");
  if (!(dt > 0.0)) throw ConfigError("sim.dt: expected a positive number");
  if (!(duration >= 0.0)) throw ConfigError("sim.duration: expected a non-negative number");
  const double period = 1.0 / frame_rate;
  if (dt > 0.5 * period * (1.0 + 1e-9)) {
    throw ConfigError("sim.dt: must be at most half the frame period (" + csv::format_double(0.5 * period) + " s)");
  }
  const double ratio = period / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-6) {
    throw ConfigError("sim.dt: the frame period must be a whole number of steps");
  }
}

int SimConfig::substeps() const { return static_cast<int>(std::lround(1.0 / (frame_rate * dt))); }

Agent* World::find(int id) {
  for (auto& a : agents) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

const Agent* World::find(int id) const { return const_cast<World*>(this)->find(id); }

// ---------------------------------------------------------------------------
// Kinematics

namespace {

struct Deriv {
  double x, y, theta, v;
};

Deriv single_track_rate(const AgentState& s, double accel, double steering, double wheelbase) {
  return {s.speed * std::cos(s.heading), s.speed * std::sin(s.heading), s.speed / wheelbase * std::tan(steering),
          accel};
}

}  // namespace

AgentState integrate_single_track(const AgentState& state, double accel, double steering, double wheelbase, double dt,
                                  Integrator integrator) {
  AgentState out = state;
  out.steering = steering;
  const Deriv k1 = single_track_rate(state, accel, steering, wheelbase);
  if (integrator == Integrator::euler) {
    out.position = {state.position.x + dt * k1.x, state.position.y + dt * k1.y};
    out.heading = state.heading + dt * k1.theta;
    out.speed = state.speed + dt * k1.v;
  } else {
    AgentState mid = state;
    mid.position = {state.position.x + dt * k1.x, state.position.y + dt * k1.y};
    mid.heading = state.heading + dt * k1.theta;
    mid.speed = std::max(0.0, state.speed + dt * k1.v);
    const Deriv k2 = single_track_rate(mid, accel, steering, wheelbase);
    out.position = {state.position.x + 0.5 * dt * (k1.x + k2.x), state.position.y + 0.5 * dt * (k1.y + k2.y)};
    out.heading = state.heading + 0.5 * dt * (k1.theta + k2.theta);
    out.speed = state.speed + 0.5 * dt * (k1.v + k2.v);
  }
  out.speed = std::max(0.0, out.speed);
  out.heading = wrap_angle(out.heading);
  out.velocity = Vec2::from_angle(out.heading) * out.speed;
  return out;
}

// ---------------------------------------------------------------------------
// Stepping

namespace {

bool finite_state(const AgentState& s) {
  return std::isfinite(s.position.x) && std::isfinite(s.position.y) && std::isfinite(s.heading) &&
         std::isfinite(s.speed) && std::isfinite(s.velocity.x) && std::isfinite(s.velocity.y) &&
         std::isfinite(s.steering) && std::isfinite(s.lateral) && std::isfinite(s.lateral_rate);
}

// Recorded state at time t; nullopt outside the track lifetime.
std::optional<AgentState> recorded_state(const Track& track, double t, double frame_rate, const AgentState& prev) {
  if (track.samples.empty()) return std::nullopt;
  const double f = t * frame_rate;
  const double rf = std::round(f);
  const double first = static_cast<double>(track.initial_frame);
  const double last = static_cast<double>(track.final_frame);
  if (f < first - 1e-6 || f > last + 1e-6) return std::nullopt;
  AgentState s = prev;
  s.mode = AgentMode::replayed;
  s.steering = 0.0;
  if (std::abs(f - rf) < 1e-6) {
    const auto& smp = track.at_frame(static_cast<long long>(rf));
    s.position = smp.position;
    s.heading = smp.heading;
    s.velocity = smp.velocity;
  } else {
    const auto i = static_cast<long long>(std::floor(f));
    const double frac = f - static_cast<double>(i);
    const auto& a = track.at_frame(i);
    const auto& b = track.at_frame(std::min(i + 1, track.final_frame));
    s.position = a.position + (b.position - a.position) * frac;
    s.heading = wrap_angle(a.heading + wrap_angle(b.heading - a.heading) * frac);
    s.velocity = a.velocity + (b.velocity - a.velocity) * frac;
  }
  s.speed = s.velocity.norm();
  return s;
}

Footprint footprint(const World& world, const Agent& a) {
  if (a.kind == AgentKind::pedestrian) return Footprint::disc(a.state.position, pedestrian_params_of(world, a).radius);
  return Footprint::rectangle(a.state.position, a.state.heading, a.length, a.width);
}

void sync_route_progress(Agent& a, double dt) {
  const auto& path = a.route.path();
  if (path.size() < 2) return;
  const double reach = std::max(a.state.speed, a.state.velocity.norm()) * dt + 2.0;
  const auto pr = path.project(a.state.position, std::max(0.0, a.state.s - 1.0), a.state.s + reach);
  a.state.s = std::max(a.state.s, pr.s);
}

// Vehicles need room to stop behind whatever is ahead on their route.
bool spawn_clear(const World& world, const Agent& a) {
  const auto& path = a.route.path();
  const bool routed = a.kind != AgentKind::pedestrian && path.size() >= 2;
  double room = 0.0;
  if (routed) {
    const auto& p = vehicle_params_of(world, a);
    room = a.state.speed * a.state.speed / (2.0 * p.b_comf) + p.min_gap + a.length;
  }
  for (const auto& o : world.agents) {
    if (&o == &a || !o.active || o.finished) continue;
    if (distance(o.state.position, a.state.position) < 0.5 * (o.length + a.length) + 2.0) return false;
    if (!routed) continue;
    const auto pr = path.project(o.state.position, 0.0, a.state.s + room + o.length);
    if (pr.distance < 0.5 * (a.width + std::max(o.width, 0.6)) + 0.5 && pr.s - a.state.s < room + 0.5 * o.length) {
      return false;
    }
  }
  return true;
}

void activate(World& world, double t, double frame_rate, double dt) {
  for (auto& a : world.agents) {
    if (a.active || a.finished) continue;
    if (a.spawn_time > t + 1e-9) continue;
    if (a.state.mode == AgentMode::replayed && a.recorded) {
      const auto rs = recorded_state(*a.recorded, t, frame_rate, a.state);
      if (!rs) {
        if (t * frame_rate > static_cast<double>(a.recorded->final_frame)) a.finished = true;
        continue;
      }
      a.state = *rs;
    } else if (a.wait_for_clear_spawn && !spawn_clear(world, a)) {
      continue;
    }
    a.active = true;
    if (a.committed.size() != a.route.yields().size()) a.committed.assign(a.route.yields().size(), false);
    sync_route_progress(a, dt);
  }
}

struct Update {
  bool computed = false;
  double accel = 0.0;
  double steering = 0.0;
  double lateral_target = 0.0;
  Vec2 ped_force;
  std::vector<bool> commit;
  ForceBreakdown terms;
};

std::vector<Neighbor> pedestrian_neighbors(const World& world, std::size_t index) {
  std::vector<Neighbor> out;
  const Agent& me = world.agents[index];
  for (std::size_t j = 0; j < world.agents.size(); ++j) {
    const Agent& o = world.agents[j];
    if (j == index || !o.active || o.finished) continue;
    if (distance(o.state.position, me.state.position) > 10.0 + 0.5 * o.length) continue;
    Neighbor n;
    n.position = o.state.position;
    n.velocity = o.state.velocity;
    if (o.kind == AgentKind::pedestrian) {
      n.radius = pedestrian_params_of(world, o).radius;
    } else {
      n.footprint = footprint(world, o);
    }
    out.push_back(n);
  }
  return out;
}

// A pedestrian stops rather than walk into a vehicle or into someone ahead going the same way.
bool pedestrian_holds(const World& world, const Agent& a) {
  const auto& path = a.route.path();
  const double r = pedestrian_params_of(world, a).radius;
  const Vec2 dir = path.tangent_at(a.state.s);
  for (const auto& o : world.agents) {
    if (&o == &a || !o.active || o.finished) continue;
    const Vec2 rel = o.state.position - a.state.position;
    if (rel.norm() > 6.0 + 0.5 * o.length) continue;
    for (const double ahead : {0.4, 0.8}) {
      const Vec2 p = a.state.position + dir * ahead;
      if (o.kind == AgentKind::pedestrian) {
        if (rel.dot(dir) <= 0.0 || o.state.velocity.dot(dir) < 0.0) break;
        if (distance(p, o.state.position) < r + pedestrian_params_of(world, o).radius + 0.1) return true;
      } else {
        const Polygon outline = footprint(world, o).outline();
        if (point_in_polygon(p, outline) || distance_to_polygon_boundary(p, outline) < r + 0.05) return true;
      }
    }
  }
  return false;
}

Vec2 pedestrian_goal(const World& world, const Agent& a) {
  const auto& path = a.route.path();
  if (path.empty() || pedestrian_holds(world, a)) return a.state.position;
  return path.point_at(std::min(a.state.s + 2.0, path.length()));
}

[[noreturn]] void abort_non_finite(const Agent& a, const ForceBreakdown& terms, double t) {
  std::ostringstream msg;
  msg << "non-finite state for agent " << a.id << " at t=" << t << " s: " << terms.describe();
  throw RuntimeAbort(msg.str());
}

void detect_collisions(World& world, double t) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < world.agents.size(); ++i) {
    if (world.agents[i].active && !world.agents[i].finished) idx.push_back(i);
  }
  std::set<std::pair<int, int>> now;
  for (std::size_t u = 0; u < idx.size(); ++u) {
    const Agent& a = world.agents[idx[u]];
    for (std::size_t w = u + 1; w < idx.size(); ++w) {
      const Agent& b = world.agents[idx[w]];
      if (a.state.mode == AgentMode::replayed && b.state.mode == AgentMode::replayed) continue;
      const double reach = 0.5 * (std::hypot(a.length, a.width) + std::hypot(b.length, b.width)) + 1.0;
      if (distance(a.state.position, b.state.position) > reach) continue;
      if (!footprints_overlap(footprint(world, a), footprint(world, b))) continue;
      now.insert({std::min(a.id, b.id), std::max(a.id, b.id)});
    }
  }
  for (const auto& pr : now) {
    if (!world.contacts.contains(pr)) world.collisions.push_back({world.step_index + 1, t, pr.first, pr.second});
  }
  world.contacts = std::move(now);
}

}  // namespace

std::optional<AgentState> state_from_track(const Track& track, double t, double frame_rate, const AgentState& prev) {
  return recorded_state(track, t, frame_rate, prev);
}

void activate_agents(World& world, const SimConfig& cfg) {
  activate(world, world.time(cfg.dt), cfg.frame_rate, cfg.dt);
}

void step(World& world, const SimConfig& cfg) {
  const double dt = cfg.dt;
  const double t = world.time(dt);
  activate(world, t, cfg.frame_rate, dt);

  std::vector<Update> updates(world.agents.size());
  for (std::size_t i = 0; i < world.agents.size(); ++i) {
    const Agent& a = world.agents[i];
    if (!a.active || a.finished || a.state.mode == AgentMode::replayed || a.external) continue;
    Update& u = updates[i];
    u.computed = true;
    if (a.kind == AgentKind::pedestrian) {
      const auto f = pedestrian_force(a.state, pedestrian_params_of(world, a), pedestrian_goal(world, a),
                                      pedestrian_neighbors(world, i), world.obstacles);
      u.ped_force = f.force;
      u.terms = f.terms;
      continue;
    }
    u.commit = a.committed;
    const auto d = vehicle_force(world, i, u.commit);
    u.accel = d.accel;
    u.lateral_target = d.lateral;
    u.terms = d.terms;
    const auto& p = vehicle_params_of(world, a);
    u.steering = pure_pursuit(a.state, a.route, a.state.lateral, p);
    // Keep the kinematic lateral acceleration v^2 tan(delta) / L within a_lat.
    const double v2 = a.state.speed * a.state.speed;
    if (v2 > 1e-9) {
      const double lim = std::atan(p.a_lat * p.L / v2);
      u.steering = std::clamp(u.steering, -lim, lim);
    }
  }

  const double t_next = world.start_time + static_cast<double>(world.step_index + 1) * dt;
  for (std::size_t i = 0; i < world.agents.size(); ++i) {
    Agent& a = world.agents[i];
    if (!a.active || a.finished) continue;
    if (a.state.mode == AgentMode::replayed) {
      if (!a.recorded) continue;
      const auto rs = recorded_state(*a.recorded, t_next, cfg.frame_rate, a.state);
      if (!rs) {
        a.finished = true;
        a.active = false;
        continue;
      }
      a.state = *rs;
      sync_route_progress(a, dt);
      continue;
    }
    if (a.external) {
      const ExternalControl& c = *a.external;
      if (c.kind == ExternalControl::Kind::setpoint) {
        a.state = c.setpoint;
      } else {
        const auto& p = vehicle_params_of(world, a);
        const double steering = std::clamp(c.steering, -p.delta_max, p.delta_max);
        const double accel = std::clamp(c.accel, -p.b_max, p.a_max);
        a.state = integrate_single_track(a.state, accel, steering, p.L, dt, cfg.integrator);
      }
      if (!finite_state(a.state)) abort_non_finite(a, {}, t_next);
      sync_route_progress(a, dt);
      continue;
    }
    Update& u = updates[i];
    if (!u.computed) continue;
    if (a.kind == AgentKind::pedestrian) {
      const auto& p = pedestrian_params_of(world, a);
      const Vec2 v_old = a.state.velocity;
      Vec2 v_new = v_old + u.ped_force * dt;
      const double cap = 1.3 * p.v0;
      if (v_new.norm() > cap) v_new = v_new.normalized() * cap;
      const Vec2 ds = cfg.integrator == Integrator::heun ? (v_old + v_new) * (0.5 * dt) : v_old * dt;
      a.state.position += ds;
      a.state.velocity = v_new;
      a.state.speed = v_new.norm();
      if (a.state.speed > 0.05) a.state.heading = std::atan2(v_new.y, v_new.x);
    } else {
      const auto& p = vehicle_params_of(world, a);
      a.committed = std::move(u.commit);
      AgentState next = integrate_single_track(a.state, u.accel, u.steering, p.L, dt, cfg.integrator);
      // In-lane offset: spring-damper toward the lateral target.
      const double e = a.state.lateral, de = a.state.lateral_rate;
      const double dde = p.k_lat * (u.lateral_target - e) - p.c_lat * de;
      next.lateral_rate = de + dt * dde;
      next.lateral = e + dt * (cfg.integrator == Integrator::heun ? 0.5 * (de + next.lateral_rate) : de);
      const double cap = std::max(0.0, 0.5 * (a.route.width_at(a.state.s) - a.width) - 0.15);
      next.lateral = std::clamp(next.lateral, -cap, cap);
      a.state = next;
    }
    if (!finite_state(a.state)) abort_non_finite(a, u.terms, t_next);
    sync_route_progress(a, dt);
    const double end_margin = a.kind == AgentKind::pedestrian ? 0.5 : 0.1;
    if (a.route.path().size() >= 2 && a.state.s >= a.route.length() - end_margin) {
      a.finished = true;
      a.active = false;
    }
  }
  detect_collisions(world, t_next);
  ++world.step_index;
}

void append_log_rows(const World& world, long long frame, std::vector<LogRow>& rows) {
  std::vector<const Agent*> live;
  for (const auto& a : world.agents) {
    if (a.active && !a.finished) live.push_back(&a);
  }
  std::sort(live.begin(), live.end(), [](const Agent* x, const Agent* y) { return x->id < y->id; });
  for (const Agent* a : live) {
    rows.push_back({frame, a->id, a->kind, a->state.position.x, a->state.position.y, a->state.heading, a->state.speed,
                    a->state.steering, a->state.mode});
  }
}

SimLog run_scenario(World world, const SimConfig& cfg) {
  cfg.validate();
  SimLog log;
  log.frame_rate = cfg.frame_rate;
  const int sub = cfg.substeps();
  const auto total_frames = static_cast<long long>(std::floor(cfg.duration * cfg.frame_rate + 1e-9));
  log.first_frame = std::llround(world.start_time * cfg.frame_rate);
  log.frame_count = total_frames + 1;
  world.step_index = 0;
  activate(world, world.time(cfg.dt), cfg.frame_rate, cfg.dt);
  append_log_rows(world, log.first_frame, log.rows);
  for (long long f = 1; f <= total_frames; ++f) {
    for (int k = 0; k < sub; ++k) step(world, cfg);
    activate(world, world.time(cfg.dt), cfg.frame_rate, cfg.dt);
    append_log_rows(world, log.first_frame + f, log.rows);
  }
  log.collisions = world.collisions;
  return log;
}

void write_log(std::ostream& out, const SimLog& log) {
  csv::Writer w(out);
  w.row({"frame", "agent_id", "kind", "x", "y", "heading", "v", "delta", "mode"});
  for (const auto& r : log.rows) {
    w.field(r.frame).field(r.agent_id).field(to_string(r.kind)).field(r.x).field(r.y).field(r.heading).field(r.v);
    w.field(r.delta).field(to_string(r.mode));
    w.end_row();
  }
}

SimLog read_log(std::istream& in, double frame_rate) {
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto table = csv::Table::parse(ss.str());
  auto col = [&](const char* name) {
    const auto c = table.column(name);
    if (!c) throw IngestError(std::string("log: missing column '") + name + "'");
    return *c;
  };
  const auto cf = col("frame"), cid = col("agent_id"), ck = col("kind"), cx = col("x"), cy = col("y"),
             ch = col("heading"), cv = col("v"), cd = col("delta"), cm = col("mode");
  SimLog log;
  log.frame_rate = frame_rate;
  try {
    for (std::size_t r = 0; r < table.rows(); ++r) {
      LogRow row;
      row.frame = csv::parse_int(table.cell(r, cf), "frame");
      row.agent_id = static_cast<int>(csv::parse_int(table.cell(r, cid), "agent_id"));
      const auto kind = parse_agent_kind(table.cell(r, ck));
      if (!kind) throw IngestError("log: unknown kind '" + table.cell(r, ck) + "'");
      row.kind = *kind;
      row.x = csv::parse_double(table.cell(r, cx), "x");
      row.y = csv::parse_double(table.cell(r, cy), "y");
      row.heading = csv::parse_double(table.cell(r, ch), "heading");
      row.v = csv::parse_double(table.cell(r, cv), "v");
      row.delta = csv::parse_double(table.cell(r, cd), "delta");
      row.mode = table.cell(r, cm) == "replayed" ? AgentMode::replayed : AgentMode::agent;
      log.rows.push_back(row);
    }
  } catch (const std::invalid_argument& e) {
    throw IngestError(std::string("log: ") + e.what());
  }
  if (!log.rows.empty()) {
    log.first_frame = log.rows.front().frame;
    log.frame_count = log.rows.back().frame - log.first_frame + 1;
  }
  return log;
}

Recording log_to_recording(const SimLog& log, int recording_id, const std::string& space_id) {
  std::map<int, Track> tracks;
  for (const auto& r : log.rows) {
    Track& t = tracks[r.agent_id];
    t.track_id = r.agent_id;
    t.kind = r.kind;
    TrackSample s;
    s.frame = r.frame;
    s.position = {r.x, r.y};
    s.heading = r.heading;
    s.velocity = Vec2::from_angle(r.heading) * r.v;
    t.samples.push_back(s);
  }
  Recording rec;
  rec.recording_id = recording_id;
  rec.frame_rate = log.frame_rate;
  rec.traffic_space_id = space_id;
  for (auto& [id, t] : tracks) {
    t.initial_frame = t.samples.front().frame;
    t.final_frame = t.samples.back().frame;
    for (std::size_t i = 0; i < t.samples.size(); ++i) {
      const auto& a = t.samples[i == 0 ? 0 : i - 1];
      const auto& b = t.samples[i + 1 < t.samples.size() ? i + 1 : i];
      const double span = static_cast<double>(b.frame - a.frame);
      if (span > 0.0) t.samples[i].acceleration = (b.velocity - a.velocity) * (log.frame_rate / span);
    }
    rec.tracks.push_back(std::move(t));
  }
  return rec;
}

}  // namespace junction
