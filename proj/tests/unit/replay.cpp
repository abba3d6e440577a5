#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "junction/replay.hpp"
#include "junction/synthetic.hpp"
#include "planted.hpp"

using namespace junction;

namespace {

const ConcreteScenario& first_v2v() {
  for (const auto& s : fixture::planted().extraction.scenarios) {
    if (s.core.category == ScenarioCategory::v2v) return s;
  }
  throw std::runtime_error("fixture has no v2v scenario");
}

// Major-road ego S->N and a minor-road challenger E->W reaching the junction `lag` seconds later.
ConcreteScenario crossing_scene(const TrafficSpace& space, double lag) {
  ConcreteScenario s;
  s.frame_rate = 25.0;
  s.traffic_space_id = space.id;
  SpeedProfile prof;
  prof.cruise = 8.0;
  s.participants.push_back(
      scripted_track(1, AgentKind::car, lane_route_path(space, "S", "N", AgentKind::car), prof, 0.0, 25.0, 4.5, 1.8));
  s.participants.push_back(
      scripted_track(2, AgentKind::car, lane_route_path(space, "E", "W", AgentKind::car), prof, lag, 25.0, 4.5, 1.8));
  s.labels[1] = {"S", "N"};
  s.labels[2] = {"E", "W"};
  s.core.ego_track_id = 1;
  s.core.challenger_track_id = 2;
  s.core.window_start = 0;
  s.core.window_end = std::max(s.participants[0].final_frame, s.participants[1].final_frame);
  return s;
}

}  // namespace

TEST_SUITE("replay") {
  TEST_CASE("dissimilarity formula") {
    DissimilarityConfig cfg;
    AgentState ego;
    TrackSample rec;
    CHECK(dissimilarity(ego, rec, cfg) == 0.0);
    ego.position = {0.0, 2.0};
    CHECK(dissimilarity(ego, rec, cfg) == 2.0);

    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> u(-5, 5), w(0, 3);
    for (int i = 0; i < 1000; ++i) {
      cfg.position_weight = w(rng);
      cfg.heading_weight = w(rng);
      cfg.speed_weight = w(rng);
      ego.position = {u(rng), u(rng)};
      ego.heading = u(rng);
      ego.speed = std::abs(u(rng));
      rec.position = {u(rng), u(rng)};
      rec.heading = u(rng);
      rec.velocity = {u(rng), u(rng)};
      const double dx = ego.position.x - rec.position.x, dy = ego.position.y - rec.position.y;
      double dh = std::fmod(ego.heading - rec.heading, 2 * std::numbers::pi);
      if (dh > std::numbers::pi) dh -= 2 * std::numbers::pi;
      if (dh <= -std::numbers::pi) dh += 2 * std::numbers::pi;
      const double dv = ego.speed - std::hypot(rec.velocity.x, rec.velocity.y);
      const double expect = std::sqrt(cfg.position_weight * (dx * dx + dy * dy) + cfg.heading_weight * dh * dh +
                                      cfg.speed_weight * dv * dv);
      CHECK(std::abs(dissimilarity(ego, rec, cfg) - expect) <= 1e-12);
    }
  }

  TEST_CASE("configuration checks") {
    DissimilarityConfig d;
    d.threshold = 0.0;
    CHECK_THROWS_AS(d.validate(), ConfigError);
    d = {};
    d.position_weight = -1.0;
    CHECK_THROWS_AS(d.validate(), ConfigError);
    CHECK_THROWS_AS(make_policy_factory("teleport"), ConfigError);
    CHECK_THROWS_AS(make_policy_factory("ramp:1"), ConfigError);
    CHECK(make_policy_factory("ramp:1:0.5")()->id() == "lateral-ramp");
    CHECK(make_policy_factory("baseline")()->id() == "baseline");
    CHECK(make_policy_factory("recorded")()->id() == "recorded");
  }

  TEST_CASE("self-replay never triggers") {
    const auto& p = fixture::planted();
    const auto& scn = first_v2v();
    RecordedEgoPolicy self;
    const ReplaySession s = run_adaptive(scn, scn.core.ego_track_id, p.space, self, ReplayConfig{});
    CHECK_FALSE(s.trigger.has_value());
    CHECK(s.mode == SessionMode::replay);
    for (const auto& [f, d] : s.trace) CHECK(d <= 1e-9);
  }

  TEST_CASE("infinite threshold never triggers") {
    const auto& p = fixture::planted();
    const auto& scn = first_v2v();
    ReplayConfig cfg;
    cfg.dissimilarity.threshold = std::numeric_limits<double>::infinity();
    LateralRampPolicy ramp(0.2, 3.0);
    const ReplaySession s = run_adaptive(scn, scn.core.ego_track_id, p.space, ramp, cfg);
    CHECK_FALSE(s.trigger.has_value());
    for (const auto& r : s.rows) CHECK(r.row.mode == (r.row.agent_id == scn.core.ego_track_id ? AgentMode::agent : AgentMode::replayed));
  }

  TEST_CASE("ramp triggers at the first frame above the threshold") {
    const auto& p = fixture::planted();
    const auto& scn = first_v2v();
    const ReplayConfig cfg;
    const double start = 0.5, rate = 1.2;
    LateralRampPolicy ramp(start, rate);
    const ReplaySession s = run_adaptive(scn, scn.core.ego_track_id, p.space, ramp, cfg);
    REQUIRE(s.trigger);
    CHECK_FALSE(s.trigger->forced);
    const Track& ego = *scn.participant(scn.core.ego_track_id);
    const double t_star = static_cast<double>(ego.initial_frame) / scn.frame_rate + start + cfg.dissimilarity.threshold / rate;
    CHECK(std::llabs(s.trigger->frame - static_cast<long long>(std::ceil(t_star * scn.frame_rate))) <= 1);
    for (const auto& [f, d] : s.trace) {
      if (f < s.trigger->frame) CHECK(d <= cfg.dissimilarity.threshold);
      if (f == s.trigger->frame) CHECK(d > cfg.dissimilarity.threshold);
    }
    // Once switched, nothing returns to replay.
    std::map<int, AgentMode> last;
    for (const auto& r : s.rows) {
      if (last.contains(r.row.agent_id) && last[r.row.agent_id] == AgentMode::agent) CHECK(r.row.mode == AgentMode::agent);
      last[r.row.agent_id] = r.row.mode;
      CHECK(r.mode == (r.row.frame >= s.trigger->frame ? SessionMode::agent : SessionMode::replay));
    }
  }

  TEST_CASE("forced switch and rewind by zero") {
    const auto& p = fixture::planted();
    const auto& scn = first_v2v();
    const ReplayConfig cfg;
    RecordedEgoPolicy self;
    RunOptions opt;
    opt.forced_switch_frame = scn.core.window_start + 20;
    const ReplaySession s = run_adaptive(scn, scn.core.ego_track_id, p.space, self, cfg, opt);
    REQUIRE(s.trigger);
    CHECK(s.trigger->forced);
    CHECK(s.trigger->frame == *opt.forced_switch_frame);
    const PolicyFactory factory = [] { return std::make_unique<RecordedEgoPolicy>(); };
    const auto again = rewind_and_vary(scn, s, p.space, factory, 0.0, {}, cfg);
    REQUIRE(again.size() == 1);
    std::vector<LogRow> a, b;
    for (const auto& r : s.log.rows) {
      if (r.frame >= s.trigger->frame) a.push_back(r);
    }
    for (const auto& r : again[0].log.rows) {
      if (r.frame >= s.trigger->frame) b.push_back(r);
    }
    CHECK_FALSE(a.empty());
    CHECK(a == b);
  }

  TEST_CASE("aggressive variations") {
    const auto v = aggressive_variations(10, 4);
    REQUIRE(v.size() == 10);
    std::set<std::vector<double>> seen;
    for (const auto& x : v) {
      std::vector<double> vals;
      for (const auto& o : x.overrides) vals.push_back(o.value);
      seen.insert(vals);
      const ModelParams base = ModelParams::defaults();
      const ModelParams m = apply_variation(base, x);
      CHECK(m.car.T_gap < base.car.T_gap);
      CHECK(m.truck.T_gap < base.truck.T_gap);
      CHECK(m.car.headway < base.car.headway);
      CHECK(m.car.v0 >= base.car.v0);
      CHECK(m.pedestrian.v0 == base.pedestrian.v0);
    }
    CHECK(seen.size() == 10);
    const auto w = aggressive_variations(10, 4);
    for (std::size_t i = 0; i < v.size(); ++i) {
      REQUIRE(v[i].overrides.size() == w[i].overrides.size());
      for (std::size_t k = 0; k < v[i].overrides.size(); ++k) CHECK(v[i].overrides[k].value == w[i].overrides[k].value);
    }
    Variation bad{"bad", {{"car.nope", 1.0, false}}};
    CHECK_THROWS_AS(apply_variation(ModelParams::defaults(), bad), ConfigError);
  }

  TEST_CASE("shorter accepted gaps do not raise the minimum PET") {
    const TrafficSpace space = make_intersection();
    const ReplayConfig cfg;
    const PolicyFactory factory = [] { return std::make_unique<RecordedEgoPolicy>(); };
    const Variation half{"half-gap", {{"*.T_gap", 0.5, true}}};
    for (double lag : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
      const ConcreteScenario scn = crossing_scene(space, lag);
      RecordedEgoPolicy self;
      RunOptions opt;
      opt.forced_switch_frame = 1;
      const ReplaySession s = run_adaptive(scn, 1, space, self, cfg, opt);
      auto base = rewind_and_vary(scn, s, space, factory, 0.0, {}, cfg);
      auto batch = rewind_and_vary(scn, s, space, factory, 0.0, {half, aggressive_variations(1, 2)[0]}, cfg);
      REQUIRE(batch.size() == 2);
      summarize_session(base[0], scn, cfg);
      double batch_min = std::numeric_limits<double>::infinity();
      for (auto& b : batch) {
        summarize_session(b, scn, cfg);
        REQUIRE(b.min_pet);
        batch_min = std::min(batch_min, *b.min_pet);
      }
      REQUIRE(base[0].min_pet);
      CAPTURE(lag);
      CHECK(batch_min <= *base[0].min_pet);
    }
  }

  TEST_CASE("variation batches are ordered and repeatable") {
    const auto& p = fixture::planted();
    const auto& scn = first_v2v();
    ReplayConfig cfg;
    LateralRampPolicy ramp(0.5, 1.2);
    const ReplaySession s = run_adaptive(scn, scn.core.ego_track_id, p.space, ramp, cfg);
    REQUIRE(s.trigger);
    const PolicyFactory factory = make_policy_factory("ramp:0.5:1.2");
    const auto vars = aggressive_variations(10, 8);
    const auto a = rewind_and_vary(scn, s, p.space, factory, 1.0, vars, cfg);
    cfg.threads = 4;
    const auto b = rewind_and_vary(scn, s, p.space, factory, 1.0, vars, cfg);
    REQUIRE(a.size() == 10);
    REQUIRE(b.size() == 10);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].variation == vars[i].name);
      CHECK(a[i].log.rows == b[i].log.rows);
      REQUIRE(a[i].trigger);
      CHECK(a[i].trigger->frame == s.trigger->frame - 25);
    }

    std::ostringstream csv;
    write_session_csv(csv, a[0]);
    CHECK(csv.str().find("dissimilarity") != std::string::npos);
    const std::string json = session_summary_json(a[0], "abc", "0.3.0");
    CHECK(json.find("\"config_hash\"") != std::string::npos);
    const ScenarioRecord rec = session_to_record(a[0], scn, cfg, "0.3.0", "abc");
    CHECK(rec.provenance.source == ScenarioSource::synthetic);
  }
}
