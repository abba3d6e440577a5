#include "junction/replay.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "junction/csv.hpp"

namespace junction {

void DissimilarityConfig::validate() const {
  if (!(position_weight >= 0.0) || !(heading_weight >= 0.0) || !(speed_weight >= 0.0)) {
    throw ConfigError("replay.weights: weights must be >= 0");
  }
  if (position_weight + heading_weight + speed_weight <= 0.0) {
    throw ConfigError("replay.weights: at least one weight must be positive");
  }
  if (!(threshold > 0.0)) throw ConfigError("replay.threshold: must be > 0");
}

double dissimilarity(const AgentState& ego, const TrackSample& recorded, const DissimilarityConfig& cfg) {
  const double dp2 = (ego.position - recorded.position).squared_norm();
  const double dh = wrap_angle(ego.heading - recorded.heading);
  const double dv = ego.speed - speed(recorded);
  return std::sqrt(cfg.position_weight * dp2 + cfg.heading_weight * dh * dh + cfg.speed_weight * dv * dv);
}

std::string_view to_string(SessionMode m) { return m == SessionMode::agent ? "agent" : "replay"; }

void ReplayConfig::validate() const {
  sim.validate();
  dissimilarity.validate();
  params.validate();
  if (!(critical_pet >= 0.0)) throw ConfigError("replay.critical_pet: must be >= 0");
  if (!(audit_rewind >= 0.0)) throw ConfigError("replay.audit_rewind: must be >= 0");
  if (threads < 1) throw ConfigError("replay.threads: must be >= 1");
}

// ---------------------------------------------------------------------------
// Policies

namespace {

AgentState coast(const AgentState& s, double dt) {
  AgentState n = s;
  n.position += Vec2::from_angle(s.heading) * (s.speed * dt);
  n.velocity = Vec2::from_angle(s.heading) * s.speed;
  return n;
}

double time_next(const PolicyInput& in) {
  return in.world->start_time + static_cast<double>(in.world->step_index + 1) * in.dt;
}

}  // namespace

ExternalControl RecordedEgoPolicy::control(const PolicyInput& in) {
  const Agent& ego = in.world->agents[in.ego_index];
  ExternalControl c;
  c.kind = ExternalControl::Kind::setpoint;
  const auto rs = in.recorded_ego ? state_from_track(*in.recorded_ego, time_next(in), in.frame_rate, ego.state)
                                  : std::nullopt;
  c.setpoint = rs ? *rs : coast(ego.state, in.dt);
  c.setpoint.mode = AgentMode::agent;
  return c;
}

void LateralRampPolicy::reset(Agent& ego) { origin_ = ego.spawn_time; }

ExternalControl LateralRampPolicy::control(const PolicyInput& in) {
  const Agent& ego = in.world->agents[in.ego_index];
  ExternalControl c;
  c.kind = ExternalControl::Kind::setpoint;
  const double t = time_next(in);
  const auto rs = in.recorded_ego ? state_from_track(*in.recorded_ego, t, in.frame_rate, ego.state) : std::nullopt;
  if (!rs) {
    c.setpoint = coast(ego.state, in.dt);
  } else {
    c.setpoint = *rs;
    const double offset = rate_ * std::max(0.0, t - (origin_ + start_));
    c.setpoint.position += Vec2::from_angle(rs->heading).left() * offset;
  }
  c.setpoint.mode = AgentMode::agent;
  return c;
}

VehicleParams BaselinePolicy::default_params() {
  VehicleParams p = ModelParams::defaults().car;
  p.v0 = 12.0;
  p.T_gap = 2.5;
  p.a_max = 1.5;
  p.headway = 1.5;
  p.lateral_sigma = 0.0;
  return p;
}

void BaselinePolicy::reset(Agent& ego) {
  ego.vehicle_params = params_;
  ego.state.preferred_offset = 0.0;
  commit_.assign(ego.route.yields().size(), false);
}

ExternalControl BaselinePolicy::control(const PolicyInput& in) {
  const Agent& ego = in.world->agents[in.ego_index];
  const auto demand = vehicle_force(*in.world, in.ego_index, commit_);
  ExternalControl c;
  c.kind = ExternalControl::Kind::actuation;
  c.accel = demand.accel;
  double steering = pure_pursuit(ego.state, ego.route, ego.state.lateral, params_);
  const double v2 = ego.state.speed * ego.state.speed;
  if (v2 > 1e-9) {
    const double lim = std::atan(params_.a_lat * params_.L / v2);
    steering = std::clamp(steering, -lim, lim);
  }
  c.steering = steering;
  return c;
}

PolicyFactory make_policy_factory(const std::string& spec) {
  if (spec == "recorded") return [] { return std::make_unique<RecordedEgoPolicy>(); };
  if (spec == "baseline") return [] { return std::make_unique<BaselinePolicy>(BaselinePolicy::default_params()); };
  if (spec.rfind("ramp:", 0) == 0) {
    const auto colon = spec.find(':', 5);
    if (colon == std::string::npos) throw ConfigError("replay.policy: expected ramp:<start>:<rate>");
    double start = 0.0, rate = 0.0;
    try {
      start = csv::parse_double(spec.substr(5, colon - 5), "ramp start");
      rate = csv::parse_double(spec.substr(colon + 1), "ramp rate");
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("replay.policy: ") + e.what());
    }
    return [start, rate] { return std::make_unique<LateralRampPolicy>(start, rate); };
  }
  throw ConfigError("replay.policy: expected recorded, baseline or ramp:<start>:<rate>, got '" + spec + "'");
}

// ---------------------------------------------------------------------------
// Variations

ModelParams apply_variation(ModelParams params, const Variation& v) {
  for (const auto& o : v.overrides) {
    std::vector<std::string> names;
    if (o.name.rfind("*.", 0) == 0) {
      for (const char* k : {"car.", "truck.", "bus.", "bicycle."}) names.push_back(k + o.name.substr(2));
    } else {
      names.push_back(o.name);
    }
    for (const auto& n : names) params.set(n, o.scale ? params.get(n) * o.value : o.value);
  }
  params.validate();
  return params;
}

std::vector<Variation> aggressive_variations(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto draw = [&](double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng()); };
  std::vector<Variation> out;
  for (std::size_t i = 0; i < n; ++i) {
    Variation v;
    v.name = "aggressive-" + std::to_string(i);
    v.overrides.push_back({"*.T_gap", draw(0.4, 0.8), true});
    v.overrides.push_back({"*.headway", draw(0.5, 0.9), true});
    v.overrides.push_back({"*.min_gap", draw(0.5, 0.9), true});
    v.overrides.push_back({"*.v0", draw(1.0, 1.25), true});
    out.push_back(std::move(v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sessions

namespace {

bool finite_control(const ExternalControl& c) {
  if (c.kind == ExternalControl::Kind::actuation) return std::isfinite(c.accel) && std::isfinite(c.steering);
  const auto& s = c.setpoint;
  return s.position.finite() && s.velocity.finite() && std::isfinite(s.heading) && std::isfinite(s.speed) &&
         std::isfinite(s.steering);
}

// Agent that only follows a straight line from its first sample; used when no route exists.
Agent straight_agent(const Track& t, double frame_rate, const ModelParams& params) {
  Agent a;
  a.id = t.track_id;
  a.kind = t.kind;
  if (t.kind == AgentKind::pedestrian) {
    a.length = a.width = 0.0;
  } else {
    a.length = t.length > 0.0 ? t.length : params.vehicle(t.kind).length;
    a.width = t.width > 0.0 ? t.width : params.vehicle(t.kind).width;
  }
  const auto& s = t.samples.front();
  a.route = Route::from_polyline(Polyline({s.position, s.position + Vec2::from_angle(s.heading) * 60.0}),
                                 t.kind == AgentKind::pedestrian ? 2.0 : 3.5);
  a.state.position = s.position;
  a.state.heading = s.heading;
  a.state.velocity = s.velocity;
  a.state.speed = speed(s);
  a.spawn_time = static_cast<double>(t.initial_frame) / frame_rate;
  a.recorded = t;
  return a;
}

// Switches a replayed agent to the model, keeping its current (recorded) state.
void hand_over(Agent& a) {
  a.state.mode = AgentMode::agent;
  a.state.steering = 0.0;
  a.state.lateral_rate = 0.0;
  const auto& path = a.route.path();
  const auto pr = path.project(a.state.position);
  const double end_margin = a.kind == AgentKind::pedestrian ? 1.0 : 0.5 * a.length + 1.0;
  const bool past_exit = pr.s >= a.route.length() - end_margin;
  const bool off_route = pr.distance > std::max(2.0, a.route.width_at(pr.s));
  if (path.size() < 2 || past_exit || off_route) {
    // Continue straight until leaving the scene.
    const Vec2 dir = Vec2::from_angle(a.state.heading);
    a.route = Route::from_polyline(Polyline({a.state.position, a.state.position + dir * 60.0}),
                                   a.kind == AgentKind::pedestrian ? 2.0 : 3.5);
    a.state.s = 0.0;
    a.state.lateral = 0.0;
  } else {
    a.state.s = pr.s;
    if (a.kind != AgentKind::pedestrian) {
      const double cap = std::max(0.0, 0.5 * (a.route.width_at(pr.s) - a.width) - 0.15);
      a.state.lateral = std::clamp(pr.lateral, -cap, cap);
    }
  }
  a.committed.assign(a.route.yields().size(), false);
  const double front = a.state.s + 0.5 * a.length;
  for (std::size_t k = 0; k < a.route.yields().size(); ++k) {
    // Conflicts already entered are not reconsidered.
    if (front > a.route.yields()[k].stop_s + 0.5) a.committed[k] = true;
  }
}

}  // namespace

ReplaySession run_adaptive(const ConcreteScenario& scenario, int ego_id, const TrafficSpace& space, EgoPolicy& policy,
                           const ReplayConfig& cfg, const RunOptions& opt) {
  cfg.validate();
  const double fr = scenario.frame_rate;
  SimConfig sim = cfg.sim;
  sim.frame_rate = fr;
  sim.validate();

  const Track* ego_track = scenario.participant(ego_id);
  if (!ego_track || ego_track->empty()) {
    throw ConfigError("replay: ego " + std::to_string(ego_id) + " is not a participant of the scenario");
  }
  if (ego_track->kind != AgentKind::car) throw ConfigError("replay: ego " + std::to_string(ego_id) + " is not a car");

  World world;
  world.space = &space;
  world.params = cfg.params;
  long long f0 = std::numeric_limits<long long>::max();
  long long f1 = std::numeric_limits<long long>::min();
  std::size_t ego_index = 0;
  for (const auto& t : scenario.participants) {
    if (t.empty()) continue;
    f0 = std::min(f0, t.initial_frame);
    f1 = std::max(f1, t.final_frame);
    std::optional<BranchLabel> label;
    if (auto it = scenario.labels.find(t.track_id); it != scenario.labels.end()) label = it->second;
    auto agent = agent_from_track(t, label, space, fr, cfg.params, cfg.seed);
    Agent a = agent ? std::move(*agent) : straight_agent(t, fr, cfg.params);
    if (t.track_id == ego_id) {
      ego_index = world.agents.size();
      a.state.mode = AgentMode::agent;
    } else {
      a.state.mode = AgentMode::replayed;
    }
    world.agents.push_back(std::move(a));
  }
  world.start_time = static_cast<double>(f0) / fr;
  policy.reset(world.agents[ego_index]);

  ReplaySession session;
  session.ego_id = ego_id;
  session.policy_id = policy.id();
  session.log.frame_rate = fr;
  session.log.first_frame = f0;
  if (opt.variation) session.variation = opt.variation->name;

  auto switch_all = [&](long long frame, double value, bool forced) {
    session.trigger = Trigger{frame, value, forced};
    session.mode = SessionMode::agent;
    if (opt.variation) world.params = apply_variation(world.params, *opt.variation);
    for (std::size_t i = 0; i < world.agents.size(); ++i) {
      if (i == ego_index) continue;
      Agent& a = world.agents[i];
      if (a.finished) continue;
      if (a.active) {
        hand_over(a);
      } else {
        a.state.mode = AgentMode::agent;
      }
    }
  };

  const int sub = sim.substeps();
  activate_agents(world, sim);
  session.end_reason = "scenario end";
  for (long long f = f0; f <= f1; ++f) {
    if (f > f0) {
      for (int k = 0; k < sub; ++k) {
        activate_agents(world, sim);
        Agent& ego = world.agents[ego_index];
        ego.external.reset();
        if (ego.active && !ego.finished) {
          PolicyInput in;
          in.step = world.step_index;
          in.time = world.time(sim.dt);
          in.dt = sim.dt;
          in.frame_rate = fr;
          in.ego_index = ego_index;
          in.world = &world;
          in.recorded_ego = ego_track;
          ExternalControl c = policy.control(in);
          if (!finite_control(c)) {
            std::ostringstream msg;
            msg << "ego policy '" << policy.id() << "' produced a non-finite output at frame " << f - 1 << " (step "
                << world.step_index << ")";
            throw RuntimeAbort(msg.str());
          }
          world.agents[ego_index].external = c;
        }
        step(world, sim);
      }
      activate_agents(world, sim);
    }

    const Agent& ego = world.agents[ego_index];
    std::optional<double> d;
    if (ego.active && ego_track->has_frame(f)) {
      d = dissimilarity(ego.state, ego_track->at_frame(f), cfg.dissimilarity);
      session.trace.emplace_back(f, *d);
    }
    if (session.mode == SessionMode::replay) {
      if (opt.forced_switch_frame && f >= *opt.forced_switch_frame) {
        switch_all(f, d.value_or(0.0), true);
      } else if (d && *d > cfg.dissimilarity.threshold) {
        switch_all(f, *d, false);
      } else if (f > ego_track->final_frame) {
        session.end_reason = "ego track ended";
        break;
      }
    }
    const std::size_t before = session.log.rows.size();
    append_log_rows(world, f, session.log.rows);
    for (std::size_t r = before; r < session.log.rows.size(); ++r) {
      session.rows.push_back({session.log.rows[r], d, session.mode});
    }
    session.log.frame_count = f - f0 + 1;
  }
  session.log.collisions = world.collisions;
  return session;
}

std::vector<ReplaySession> rewind_and_vary(const ConcreteScenario& scenario, const ReplaySession& session,
                                           const TrafficSpace& space, const PolicyFactory& policy, double rewind,
                                           const std::vector<Variation>& variations, const ReplayConfig& cfg) {
  if (!session.trigger) throw ConfigError("rewind_and_vary: the session has no trigger");
  if (!(rewind >= 0.0)) throw ConfigError("rewind_and_vary: rewind must be >= 0");
  long long f0 = std::numeric_limits<long long>::max();
  for (const auto& t : scenario.participants) {
    if (!t.empty()) f0 = std::min(f0, t.initial_frame);
  }
  long long start = session.trigger->frame - std::llround(rewind * scenario.frame_rate);
  std::string warning;
  if (start < f0) {
    warning = "rewind of " + csv::format_double(rewind) + " s reaches before the scenario start; clamped to frame " +
              std::to_string(f0);
    start = f0;
  }
  std::vector<Variation> vars = variations;
  if (vars.empty()) vars.push_back(Variation{"none", {}});

  std::vector<ReplaySession> out(vars.size());
  std::vector<std::exception_ptr> errors(vars.size());
  auto run = [&](std::size_t i) {
    try {
      auto p = policy();
      RunOptions opt;
      opt.forced_switch_frame = start;
      opt.variation = vars[i];
      out[i] = run_adaptive(scenario, session.ego_id, space, *p, cfg, opt);
      if (!warning.empty()) out[i].warnings.push_back(warning);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(vars.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < vars.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < vars.size(); i = next++) run(i);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

namespace {

Recording session_recording(const ReplaySession& session, const ConcreteScenario& scenario) {
  Recording rec = log_to_recording(session.log, scenario.recording_id, scenario.traffic_space_id);
  for (auto& t : rec.tracks) {
    if (const Track* orig = scenario.participant(t.track_id)) {
      t.kind = orig->kind;
      t.width = orig->width;
      t.length = orig->length;
    }
  }
  return rec;
}

PETResult pair_pet(const Track& a, const Track& b, double frame_rate, const FootprintConfig& fp,
                   std::optional<ConflictArea>* area_out = nullptr) {
  const Polyline pa = path_of(a, 0.5);
  const Polyline pb = path_of(b, 0.5);
  PETResult none;
  if (pa.size() < 2 || pb.size() < 2 || pa.length() <= 0.0 || pb.length() <= 0.0) {
    none.reason = "degenerate path";
    return none;
  }
  std::vector<ConflictArea> slices;
  for (const auto& area : find_conflict_areas(pa, path_half_width(a, fp), pb, path_half_width(b, fp))) {
    for (auto& s : slice_along(area, pa, pb, 5.0)) slices.push_back(std::move(s));
  }
  if (slices.empty()) {
    none.reason = "no conflict area";
    return none;
  }
  PETResult best;
  std::optional<std::size_t> best_i;
  for (std::size_t i = 0; i < slices.size(); ++i) {
    auto r = compute_pet(a, b, slices[i], frame_rate, fp);
    if (r.pet && (!best.pet || *r.pet < *best.pet)) {
      best = std::move(r);
      best_i = i;
    } else if (!best_i && !r.pet && best.reason.empty()) {
      best = std::move(r);
    }
  }
  if (area_out && best_i) *area_out = slices[*best_i];
  return best;
}

}  // namespace

void summarize_session(ReplaySession& session, const ConcreteScenario& scenario, const ReplayConfig& cfg) {
  session.min_pet.reset();
  session.min_pet_agent = -1;
  const Recording rec = session_recording(session, scenario);
  const Track* ego = rec.find(session.ego_id);
  if (!ego || ego->size() < 2) return;
  for (const auto& t : rec.tracks) {
    if (t.track_id == session.ego_id || t.size() < 2) continue;
    const auto r = pair_pet(*ego, t, rec.frame_rate, cfg.footprint);
    if (r.pet && (!session.min_pet || *r.pet < *session.min_pet)) {
      session.min_pet = r.pet;
      session.min_pet_agent = t.track_id;
    }
  }
}

void false_positive_audit(ReplaySession& session, const ConcreteScenario& scenario, const TrafficSpace& space,
                          const PolicyFactory& policy, const ReplayConfig& cfg) {
  session.possible_false_positive = false;
  if (!session.trigger) return;
  const bool recorded_critical = scenario.core.pet.collision ||
                                 (scenario.core.pet.pet && *scenario.core.pet.pet <= cfg.critical_pet);
  if (!recorded_critical) return;
  auto runs = rewind_and_vary(scenario, session, space, policy, cfg.audit_rewind, {}, cfg);
  auto& audit = runs.front();
  summarize_session(audit, scenario, cfg);
  const bool ego_collision = std::any_of(audit.log.collisions.begin(), audit.log.collisions.end(), [&](const auto& c) {
    return c.agent_a == session.ego_id || c.agent_b == session.ego_id;
  });
  const bool reappears = ego_collision || (audit.min_pet && *audit.min_pet <= cfg.critical_pet);
  session.possible_false_positive = !reappears;
  for (const auto& w : audit.warnings) session.warnings.push_back("audit: " + w);
}

void write_session_csv(std::ostream& out, const ReplaySession& session) {
  csv::Writer w(out);
  w.row({"frame", "agent_id", "kind", "x", "y", "heading", "v", "delta", "mode", "dissimilarity", "session_mode"});
  for (const auto& r : session.rows) {
    const auto& l = r.row;
    w.field(l.frame).field(l.agent_id).field(to_string(l.kind)).field(l.x).field(l.y).field(l.heading).field(l.v);
    w.field(l.delta).field(to_string(l.mode));
    if (r.dissimilarity) {
      w.field(*r.dissimilarity);
    } else {
      w.empty_field();
    }
    w.field(to_string(r.mode));
    w.end_row();
  }
}

std::string session_summary_json(const ReplaySession& session, const std::string& config_hash,
                                 const std::string& version) {
  nlohmann::ordered_json doc;
  doc["version"] = version;
  doc["config_hash"] = config_hash;
  doc["ego_id"] = session.ego_id;
  doc["policy"] = session.policy_id;
  doc["variation"] = session.variation ? nlohmann::ordered_json(*session.variation) : nlohmann::ordered_json(nullptr);
  doc["final_mode"] = std::string(to_string(session.mode));
  if (session.trigger) {
    doc["trigger_frame"] = session.trigger->frame;
    doc["trigger_value"] = session.trigger->value;
    doc["trigger_forced"] = session.trigger->forced;
  } else {
    doc["trigger_frame"] = nullptr;
    doc["trigger_value"] = nullptr;
    doc["trigger_forced"] = false;
  }
  doc["end_reason"] = session.end_reason;
  doc["frames"] = session.log.frame_count;
  doc["min_pet"] = session.min_pet ? nlohmann::ordered_json(*session.min_pet) : nlohmann::ordered_json(nullptr);
  doc["min_pet_agent"] = session.min_pet_agent;
  bool ego_collision = false;
  auto cols = nlohmann::ordered_json::array();
  for (const auto& c : session.log.collisions) {
    if (c.agent_a == session.ego_id || c.agent_b == session.ego_id) ego_collision = true;
    cols.push_back({{"time", c.time}, {"agent_a", c.agent_a}, {"agent_b", c.agent_b}});
  }
  doc["collision"] = !session.log.collisions.empty();
  doc["ego_collision"] = ego_collision;
  doc["collisions"] = cols;
  doc["possible_false_positive"] = session.possible_false_positive;
  doc["warnings"] = session.warnings;
  return doc.dump(2) + "\n";
}

ScenarioRecord session_to_record(const ReplaySession& session, const ConcreteScenario& scenario,
                                 const ReplayConfig& cfg, const std::string& pipeline_version,
                                 const std::string& config_hash) {
  const Recording rec = session_recording(session, scenario);
  ScenarioRecord out;
  out.provenance = {ScenarioSource::synthetic, pipeline_version, config_hash};
  ConcreteScenario& c = out.scenario;
  c.recording_id = scenario.recording_id;
  c.traffic_space_id = scenario.traffic_space_id;
  c.frame_rate = scenario.frame_rate;
  c.participants = rec.tracks;
  for (const auto& t : rec.tracks) {
    if (auto it = scenario.labels.find(t.track_id); it != scenario.labels.end()) c.labels[t.track_id] = it->second;
  }
  c.core.ego_track_id = session.ego_id;
  c.core.challenger_track_id = scenario.core.challenger_track_id;
  c.core.category = scenario.core.category;
  c.core.functional_type = scenario.core.functional_type;
  c.core.window_start = session.log.first_frame;
  c.core.window_end = session.log.first_frame + std::max<long long>(0, session.log.frame_count - 1);
  const Track* ego = rec.find(session.ego_id);
  const Track* chal = rec.find(scenario.core.challenger_track_id);
  if (ego && chal && ego->size() >= 2 && chal->size() >= 2) {
    std::optional<ConflictArea> area;
    c.core.pet = pair_pet(*ego, *chal, rec.frame_rate, cfg.footprint, &area);
    c.core.conflict = area;
    c.core.critical = c.core.pet.pet && *c.core.pet.pet <= cfg.critical_pet;
    if (area) {
      c.core.ego_distance_to_conflict = area->a_path_s;
      c.core.challenger_distance_to_conflict = area->b_path_s;
    }
  } else {
    c.core.pet.reason = "challenger not in the session log";
  }
  return out;
}

}  // namespace junction
