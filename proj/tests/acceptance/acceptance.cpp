// Acceptance checks 1-10. Prints one PASS/FAIL line per criterion; exits nonzero when any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "cli/cli.hpp"
#include "junction/calibrate.hpp"
#include "junction/extraction.hpp"
#include "junction/maneuvers.hpp"
#include "junction/preprocess.hpp"
#include "junction/replay.hpp"
#include "junction/scenariodb.hpp"
#include "junction/simcore.hpp"
#include "junction/synthetic.hpp"
#include "oracles.hpp"

using namespace junction;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream ss;
  ss.precision(prec);
  ss << v;
  return ss.str();
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct Fixture {
  Recording recording;
  TrafficSpace space;
  std::vector<PlantedPair> pairs;
  LabelTable labels;
  ExtractionResult result;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture x;
    const auto dir = oracle::fixture_dir();
    x.recording = load_recording(
        {dir / "planted_recordingMeta.csv", dir / "planted_tracksMeta.csv", dir / "planted_tracks.csv"},
        ColumnMap::identity());
    x.space = load_traffic_space(dir / "map.json");
    std::ifstream in(dir / "planted.csv");
    x.pairs = read_planted_pairs(in);
    auto [kept, report] = filter_tracks(x.recording, FilterRules::defaults(x.recording.frame_rate));
    x.recording = std::move(kept);
    x.labels = label_recording(x.recording, x.space, LabelingConfig{});
    x.result = extract_all(x.recording, x.space, x.labels, ExtractionConfig{});
    return x;
  }();
  return f;
}

// ---------------------------------------------------------------------------
// 1. PET against dense occupancy sampling

struct LineMotion {
  Vec2 crossing;
  double heading;
  double v;
  double tc;  // time at the crossing point
  Vec2 at(double t) const { return crossing + Vec2::from_angle(heading) * (v * (t - tc)); }
};

Track line_track(int id, AgentKind kind, const LineMotion& m, double reach, double fr, double length, double width) {
  Track t;
  t.track_id = id;
  t.kind = kind;
  t.length = length;
  t.width = width;
  const auto f0 = static_cast<long long>(std::ceil((m.tc - reach / m.v) * fr));
  const auto f1 = static_cast<long long>(std::floor((m.tc + reach / m.v) * fr));
  for (long long f = f0; f <= f1; ++f) {
    TrackSample s;
    s.frame = f;
    s.position = m.at(static_cast<double>(f) / fr);
    s.heading = m.heading;
    s.velocity = Vec2::from_angle(m.heading) * m.v;
    t.samples.push_back(s);
  }
  finalize_track(t);
  return t;
}

std::optional<std::pair<double, double>> dense_occupancy(const Track& t, const LineMotion& m, const Polygon& area,
                                                         double fr) {
  const double t0 = static_cast<double>(t.initial_frame) / fr;
  const double t1 = static_cast<double>(t.final_frame) / fr;
  std::optional<std::pair<double, double>> occ;
  const auto n = static_cast<long long>(std::floor((t1 - t0) / 0.001));
  for (long long k = 0; k <= n; ++k) {
    const double time = t0 + static_cast<double>(k) * 0.001;
    const Vec2 p = m.at(time);
    const bool hit = t.kind == AgentKind::pedestrian
                         ? oracle::disc_overlaps_polygon(p, 0.3, area)
                         : oracle::polygons_overlap(oracle::rectangle(p, m.heading, t.length, t.width), area);
    if (hit) {
      if (!occ) occ = std::make_pair(time, time);
      occ->second = time;
    }
  }
  return occ;
}

Outcome criterion1() {
  const auto t_start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  const double fr = 25.0;
  const FootprintConfig fp;
  int evaluated = 0, matched = 0;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double pick = uniform(rng, 0.0, 1.0);
    const AgentKind kb = pick < 0.5 ? AgentKind::car : pick < 0.75 ? AgentKind::pedestrian : AgentKind::bicycle;
    const Vec2 cross{uniform(rng, -5, 5), uniform(rng, -5, 5)};
    const double ha = uniform(rng, -std::numbers::pi, std::numbers::pi);
    const double hb = ha + (uniform(rng, 0.0, 1.0) < 0.5 ? 1 : -1) * uniform(rng, 0.5, 2.6);
    const double va = uniform(rng, 4.0, 14.0);
    const double vb = kb == AgentKind::car ? uniform(rng, 4.0, 14.0) : kb == AgentKind::bicycle ? uniform(rng, 3.0, 7.0)
                                                                                              : uniform(rng, 0.8, 2.0);
    const LineMotion ma{cross, ha, va, 30.0};
    const LineMotion mb{cross, hb, vb, 30.0 + uniform(rng, -4.0, 4.0)};
    const Track a = line_track(1, AgentKind::car, ma, 40.0, fr, 4.5, 1.8);
    const double lb = kb == AgentKind::car ? 4.5 : kb == AgentKind::bicycle ? 1.8 : 0.0;
    const double wb = kb == AgentKind::car ? 1.8 : kb == AgentKind::bicycle ? 0.6 : 0.0;
    const Track b = line_track(2, kb, mb, kb == AgentKind::pedestrian ? 15.0 : 40.0, fr, lb, wb);

    const auto area = find_conflict_area(path_of(a), path_half_width(a, fp), path_of(b), path_half_width(b, fp));
    if (!area) continue;
    ++evaluated;
    const PETResult r = compute_pet(a, b, *area, fr, fp);
    const auto oa = dense_occupancy(a, ma, area->polygon, fr);
    const auto ob = dense_occupancy(b, mb, area->polygon, fr);
    bool ok = false;
    if (!oa || !ob) {
      ok = !r.pet.has_value();
    } else if (r.pet) {
      const bool overlap = oa->first <= ob->second && ob->first <= oa->second;
      const double expect = overlap ? 0.0 : (oa->first < ob->first ? ob->first - oa->second : oa->first - ob->second);
      const double dev = std::abs(*r.pet - expect);
      worst = std::max(worst, dev);
      ok = dev <= 1.0 / fr;
    }
    if (ok) ++matched;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {evaluated == 200 && matched == 200 && secs < 60.0,
          std::to_string(matched) + "/" + std::to_string(evaluated) + " pairs within 0.04 s, max deviation " +
              fmt(worst) + " s, " + fmt(secs, 3) + " s"};
}

// ---------------------------------------------------------------------------
// 2. Planted extraction

Outcome criterion2() {
  const auto& fx = fixture();
  std::map<std::pair<int, int>, const PlantedPair*> planted, decoys;
  std::map<ScenarioCategory, int> planted_per_cat;
  for (const auto& p : fx.pairs) {
    (p.decoy ? decoys : planted)[{p.ego_id, p.challenger_id}] = &p;
    if (!p.decoy) ++planted_per_cat[p.category];
  }
  int hits = 0, wrong_category = 0, false_retained = 0, type_agree = 0;
  for (const auto& s : fx.result.scenarios) {
    const auto it = planted.find({s.core.ego_track_id, s.core.challenger_track_id});
    if (it == planted.end()) {
      ++false_retained;
      continue;
    }
    ++hits;
    if (s.core.category != it->second->category) ++wrong_category;
    if (s.core.functional_type.name == it->second->functional_type) ++type_agree;
  }
  // Conflict-area existence from the buffered paths' minimum distance.
  const FootprintConfig fp;
  int v2p = 0, v2p_agree = 0;
  for (const auto& c : fx.result.candidates) {
    if (c.category != ScenarioCategory::v2p) continue;
    const Track* a = fx.recording.find(c.ego_track_id);
    const Track* b = fx.recording.find(c.challenger_track_id);
    const double d = oracle::polyline_distance(path_of(*a).points(), path_of(*b).points(), 0.05);
    const bool exists = d <= path_half_width(*a, fp) + path_half_width(*b, fp);
    ++v2p;
    if (exists == (c.functional_type.name == "cross")) ++v2p_agree;
  }
  const bool mix = planted_per_cat[ScenarioCategory::v2v] == 8 && planted_per_cat[ScenarioCategory::v2p] == 6 &&
                   planted_per_cat[ScenarioCategory::v2b] == 6 && decoys.size() == 10;
  const bool pass = mix && hits == 20 && fx.result.scenarios.size() == 20 && wrong_category == 0 &&
                    false_retained == 0 && v2p > 0 && v2p_agree == v2p;
  return {pass, std::to_string(hits) + "/20 planted retained, " + std::to_string(false_retained) +
                    " false retentions, " + std::to_string(wrong_category) + " wrong categories, v2p verdicts " +
                    std::to_string(v2p_agree) + "/" + std::to_string(v2p) + ", intended type " +
                    std::to_string(type_agree) + "/20"};
}

// ---------------------------------------------------------------------------
// 3. Labeling

TrafficSpace translated(const TrafficSpace& in, Vec2 d) {
  TrafficSpace out = in;
  for (auto& l : out.lanes) {
    std::vector<Vec2> pts = l.centerline.points();
    for (auto& p : pts) p += d;
    l.centerline = Polyline(std::move(pts));
  }
  for (auto& c : out.crosswalks) {
    for (auto& p : c) p += d;
  }
  for (auto& r : out.reference_points) r.position += d;
  out.finalize();
  return out;
}

std::string dataset_check() {
  const char* env = std::getenv("JUNCTION_IND_DIR");
  if (!env) return "dataset check skipped (JUNCTION_IND_DIR unset)";
  const fs::path dir = env;
  try {
    const ColumnMap cm =
        fs::exists(dir / "column_map.txt") ? ColumnMap::read(dir / "column_map.txt") : ColumnMap::identity();
    Recording rec = load_recording({dir / "16_recordingMeta.csv", dir / "16_tracksMeta.csv", dir / "16_tracks.csv"}, cm);
    const TrafficSpace space = load_traffic_space(dir / "map.json");
    auto [kept, report] = filter_tracks(rec, FilterRules::defaults(rec.frame_rate));
    const auto table = label_recording(kept, space, LabelingConfig{});
    int vehicles = 0, irregular = 0;
    for (const auto& row : table.rows) {
      if (!is_motor_vehicle(row.kind)) continue;
      ++vehicles;
      if (!is_regular(row.maneuver)) ++irregular;
    }
    const bool ok = vehicles == 270 && irregular == 2;
    return std::string("dataset check ") + (ok ? "matched" : "MISMATCH") + " (" + std::to_string(vehicles) +
           " vehicles, " + std::to_string(irregular) + " irregular)";
  } catch (const std::exception& e) {
    return std::string("dataset check MISMATCH (") + e.what() + ")";
  }
}

Outcome criterion3() {
  const TrafficSpace space = make_intersection();
  const Vec2 shift{1234.5678, -876.54321};
  const TrafficSpace moved = translated(space, shift);
  const LabelingConfig cfg;
  std::mt19937_64 rng(303);
  int agree = 0, invariant = 0, unassigned = 0;
  for (int i = 0; i < 1000; ++i) {
    Track t;
    t.track_id = i + 1;
    t.kind = kAllKinds[static_cast<std::size_t>(rng() % 5)];
    const auto refs = space.reference_points_for(t.kind);
    const Vec2 a = refs[rng() % refs.size()]->position + Vec2{uniform(rng, -9, 9), uniform(rng, -9, 9)};
    const Vec2 b = refs[rng() % refs.size()]->position + Vec2{uniform(rng, -9, 9), uniform(rng, -9, 9)};
    const int n = 10 + static_cast<int>(rng() % 30);
    for (int k = 0; k < n; ++k) {
      const double u = static_cast<double>(k) / (n - 1);
      TrackSample s;
      s.frame = k;
      s.position = a * (1.0 - u) + b * u + Vec2{uniform(rng, -1, 1), uniform(rng, -1, 1)};
      t.samples.push_back(s);
    }
    finalize_track(t);
    const auto got = assign_branch_label(t, space, cfg).label;
    const auto want = oracle::brute_force_label(t, space, cfg.endpoint_window, cfg.max_assign_distance);
    const bool same = (want.entry && want.exit) ? (got && got->entry == *want.entry && got->exit == *want.exit) : !got;
    if (same) ++agree;
    if (!got) ++unassigned;

    Track shifted = t;
    for (auto& s : shifted.samples) s.position += shift;
    const auto got2 = assign_branch_label(shifted, moved, cfg).label;
    if (got2 == got) ++invariant;
  }
  return {agree == 1000 && invariant == 1000,
          std::to_string(agree) + "/1000 agree with brute force (" + std::to_string(unassigned) +
              " unassignable), translation invariant " + std::to_string(invariant) + "/1000; " + dataset_check()};
}

// ---------------------------------------------------------------------------
// 4. Force analytics

// Lateral acceleration v * yaw rate from logged headings (central differences).
double max_lateral_accel(const SimLog& log, int id) {
  std::vector<const LogRow*> rows;
  for (const auto& r : log.rows) {
    if (r.agent_id == id) rows.push_back(&r);
  }
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
    const double yaw = wrap_angle(rows[k + 1]->heading - rows[k - 1]->heading) * log.frame_rate / 2.0;
    worst = std::max(worst, std::abs(rows[k]->v * yaw));
  }
  return worst;
}

Polyline curve_route(double radius) {
  std::vector<Vec2> pts;
  for (double x = -120.0; x < 0.0; x += 1.0) pts.push_back({x, 0.0});
  const int n = static_cast<int>(std::ceil(radius * std::numbers::pi / 2.0 / 0.25));
  for (int k = 0; k <= n; ++k) {
    const double phi = std::numbers::pi / 2.0 * k / n;
    pts.push_back({radius * std::sin(phi), radius - radius * std::cos(phi)});
  }
  for (double y = radius + 1.0; y <= radius + 100.0; y += 1.0) pts.push_back({radius, y});
  return Polyline(std::move(pts));
}

Outcome criterion4() {
  std::vector<std::string> fails;
  const PedestrianParams pp;
  AgentState ped;
  ped.velocity = {pp.v0, 0.0};
  ped.speed = pp.v0;
  const double eq = pedestrian_force(ped, pp, {50.0, 0.0}, {}, {}).force.norm();
  if (!(eq < 1e-9)) fails.push_back("equilibrium");
  ped.velocity = {};
  ped.speed = 0.0;
  const double rest = pedestrian_force(ped, pp, {50.0, 0.0}, {}, {}).force.norm();
  if (!(std::abs(rest - pp.v0 / pp.tau) <= 1e-12)) fails.push_back("rest");

  AgentState p1, p2;
  p1.position = {-1.0, 0.0};
  p1.velocity = {pp.v0, 0.0};
  p1.speed = pp.v0;
  p2.position = {1.0, 0.0};
  p2.velocity = {-pp.v0, 0.0};
  p2.speed = pp.v0;
  const Vec2 f1 = pedestrian_force(p1, pp, {50.0, 0.0}, {{p2.position, p2.velocity, pp.radius, {}}}, {}).force;
  const Vec2 f2 = pedestrian_force(p2, pp, {-50.0, 0.0}, {{p1.position, p1.velocity, pp.radius, {}}}, {}).force;
  const double expect = pp.A * std::exp((2.0 * pp.radius - 2.0) / pp.B);
  const double mirror = (f1 + f2).norm();
  const double formula = std::abs(f1.x + expect) + std::abs(f1.y);
  if (!(mirror < 1e-9 && formula < 1e-9)) fails.push_back("head-on");

  // Lateral acceleration through the 90 degree turns of the synthetic junction and a 20 m arc.
  const TrafficSpace space = make_intersection();
  const ModelParams params = ModelParams::defaults();
  SimConfig sim;
  sim.duration = 25.0;
  double worst_alat = 0.0;
  for (const auto& [entry, exit] : std::vector<std::pair<std::string, std::string>>{{"S", "W"}, {"S", "E"}, {"N", "E"}}) {
    World w;
    w.space = &space;
    w.params = params;
    w.agents.push_back(oracle::lane_agent(space, 1, entry, exit, AgentKind::car, params, 2.25, 10.0));
    worst_alat = std::max(worst_alat, max_lateral_accel(run_scenario(std::move(w), sim), 1));
  }
  const double R = 20.0;
  World w;
  w.space = &space;
  w.params = params;
  Agent a;
  a.id = 1;
  a.route = Route::from_polyline(curve_route(R), 3.5, kUnconstrained);
  a.state.s = 2.25;
  a.state.position = a.route.path().point_at(2.25);
  a.state.heading = 0.0;
  a.state.speed = params.car.v0;
  a.state.velocity = {params.car.v0, 0.0};
  w.agents.push_back(a);
  const SimLog log = run_scenario(std::move(w), sim);
  worst_alat = std::max(worst_alat, max_lateral_accel(log, 1));
  const double target = std::sqrt(params.car.a_lat * R);
  std::optional<double> v_entry, v_apex;
  for (std::size_t k = 1; k < log.rows.size(); ++k) {
    const auto& p = log.rows[k - 1];
    const auto& q = log.rows[k];
    if (!v_entry && p.x < 0.0 && q.x >= 0.0) v_entry = p.v + (q.v - p.v) * (-p.x) / (q.x - p.x);
    const double phi_p = std::atan2(p.x, R - p.y), phi_q = std::atan2(q.x, R - q.y);
    if (!v_apex && p.x > 0.0 && phi_p < std::numbers::pi / 4 && phi_q >= std::numbers::pi / 4) v_apex = q.v;
  }
  const double entry_err = v_entry ? std::abs(*v_entry - target) / target : 1.0;
  const double apex_err = v_apex ? std::abs(*v_apex - target) / target : 1.0;
  if (!(worst_alat <= 1.05 * params.car.a_lat)) fails.push_back("lateral acceleration");
  if (!(entry_err <= 0.05)) fails.push_back("curve entry speed");

  std::string detail = "equilibrium |F| " + fmt(eq, 3) + ", rest |F|-v0/tau " + fmt(rest - pp.v0 / pp.tau, 3) +
                       ", head-on mirror " + fmt(mirror, 3) + ", max a_lat " + fmt(worst_alat) + " (limit " +
                       fmt(1.05 * params.car.a_lat) + "), curve entry v " + fmt(v_entry.value_or(-1)) + " apex v " +
                       fmt(v_apex.value_or(-1)) + " vs " + fmt(target) + " (entry err " + fmt(100 * entry_err, 3) +
                       "%, apex err " + fmt(100 * apex_err, 3) + "%)";
  for (const auto& f : fails) detail += "; failed: " + f;
  return {fails.empty(), detail};
}

// ---------------------------------------------------------------------------
// 5. Single-track circle

double kasa_radius(const std::vector<Vec2>& pts) {
  // Least squares for x^2 + y^2 + D x + E y + F = 0.
  double m[3][4] = {};
  for (const auto& p : pts) {
    const double row[3] = {p.x, p.y, 1.0};
    const double rhs = -(p.x * p.x + p.y * p.y);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m[i][j] += row[i] * row[j];
      m[i][3] += row[i] * rhs;
    }
  }
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    }
    std::swap(m[c], m[piv]);
    for (int r = 0; r < 3; ++r) {
      if (r == c) continue;
      const double f = m[r][c] / m[c][c];
      for (int k = c; k < 4; ++k) m[r][k] -= f * m[c][k];
    }
  }
  const double D = m[0][3] / m[0][0], E = m[1][3] / m[1][1], F = m[2][3] / m[2][2];
  return std::sqrt(D * D / 4.0 + E * E / 4.0 - F);
}

Outcome criterion5() {
  const double L = 2.8, delta = 0.1, v = 10.0, dt = 0.01;
  const double R = L / std::tan(delta);
  const Vec2 center{0.0, R};
  auto run = [&](Integrator integ, std::vector<Vec2>& pts) {
    AgentState s;
    s.speed = v;
    s.velocity = {v, 0.0};
    const auto steps = static_cast<int>(std::ceil(2.0 * std::numbers::pi * R / v / dt));
    double err = 0.0;
    for (int k = 0; k < steps; ++k) {
      s = integrate_single_track(s, 0.0, delta, L, dt, integ);
      pts.push_back(s.position);
      err = std::max(err, std::abs(distance(s.position, center) - R));
    }
    return err;
  };
  std::vector<Vec2> euler_pts, heun_pts;
  const double e_euler = run(Integrator::euler, euler_pts);
  const double e_heun = run(Integrator::heun, heun_pts);
  const double r_fit = kasa_radius(euler_pts);
  const double rel = std::abs(r_fit - R) / R;
  return {rel <= 0.005 && e_heun < e_euler,
          "Euler fitted radius " + fmt(r_fit, 7) + " vs L/tan(delta) " + fmt(R, 7) + " (" + fmt(100 * rel, 3) +
              "%), max radial error Euler " + fmt(e_euler, 3) + " m, Heun " + fmt(e_heun, 3) + " m"};
}

// ---------------------------------------------------------------------------
// 6. Priority

struct YieldScene {
  double min_speed = 1e9;
  double gap_at_min = 0.0;  // front bumper minus yield line at the slowest point
  double min_approach = 1e9;
};

// Minor car E->W against a major car S->N. Simultaneous: the minor car approaches its line at
// 5 m/s from 6 m out and the major car reaches the shared stretch at the same free-flow time.
// Clear: the major car is already at the stretch while the minor car is 40 m from its line.
YieldScene yield_scene(bool simultaneous) {
  static const TrafficSpace space = make_intersection();
  const ModelParams params = ModelParams::defaults();
  const double half = 0.5 * params.car.length;
  Agent minor = oracle::lane_agent(space, 2, "E", "W", AgentKind::car, params, 0.0, 10.0);
  const YieldPoint* yp = nullptr;
  for (const auto& y : minor.route.yields()) {
    if (y.must_yield && y.other_lane == "c_S_N") yp = &y;
  }
  if (!yp) return {};
  const YieldPoint y = *yp;
  const double minor_front = y.stop_s - (simultaneous ? 6.0 : 40.0);
  const double minor_v = simultaneous ? 5.0 : 10.0;
  minor = oracle::lane_agent(space, 2, "E", "W", AgentKind::car, params, minor_front - half, minor_v);
  Agent major = oracle::lane_agent(space, 1, "S", "N", AgentKind::car, params, 0.0, 10.0);
  const double major_zone = *major.route.lane_offset(y.other_lane) + y.other_in;
  const double v_major = params.car.v0;
  const double t_arrive = time_to_cover(y.zone_in - minor_front, minor_v, params.car.a_max, params.car.v0);
  const double major_front = simultaneous ? major_zone - v_major * t_arrive : major_zone - 1.0;
  major = oracle::lane_agent(space, 1, "S", "N", AgentKind::car, params, major_front - half, v_major);

  World w;
  w.space = &space;
  w.params = params;
  w.agents = {major, minor};
  SimConfig sim;
  YieldScene out;
  activate_agents(w, sim);
  for (int k = 0; k < 1000; ++k) {
    step(w, sim);
    const Agent& m = w.agents[1];
    const double front = m.state.s + half;
    if (front < y.zone_in) out.min_approach = std::min(out.min_approach, m.state.speed);
    if (m.state.speed < out.min_speed) {
      out.min_speed = m.state.speed;
      out.gap_at_min = front - y.stop_s;
    }
  }
  return out;
}

bool footprint_collision(const std::vector<const LogRow*>& frame_rows, const std::map<int, const Agent*>& agents) {
  for (std::size_t i = 0; i < frame_rows.size(); ++i) {
    for (std::size_t j = i + 1; j < frame_rows.size(); ++j) {
      const auto* a = agents.at(frame_rows[i]->agent_id);
      const auto* b = agents.at(frame_rows[j]->agent_id);
      const Vec2 pa{frame_rows[i]->x, frame_rows[i]->y}, pb{frame_rows[j]->x, frame_rows[j]->y};
      if (distance(pa, pb) > 8.0) continue;
      bool hit;
      if (a->kind == AgentKind::pedestrian && b->kind == AgentKind::pedestrian) {
        hit = distance(pa, pb) < 0.6;
      } else if (a->kind == AgentKind::pedestrian || b->kind == AgentKind::pedestrian) {
        const auto* veh = a->kind == AgentKind::pedestrian ? frame_rows[j] : frame_rows[i];
        const auto* pd = a->kind == AgentKind::pedestrian ? frame_rows[i] : frame_rows[j];
        const auto* va = a->kind == AgentKind::pedestrian ? b : a;
        hit = oracle::disc_overlaps_polygon({pd->x, pd->y}, 0.3,
                                            oracle::rectangle({veh->x, veh->y}, veh->heading, va->length, va->width));
      } else {
        hit = oracle::polygons_overlap(oracle::rectangle(pa, frame_rows[i]->heading, a->length, a->width),
                                       oracle::rectangle(pb, frame_rows[j]->heading, b->length, b->width));
      }
      if (hit) return true;
    }
  }
  return false;
}

Outcome criterion6() {
  const YieldScene conflict = yield_scene(true);
  const YieldScene clear = yield_scene(false);
  const bool stop_ok = conflict.min_speed < 0.1 && std::abs(conflict.gap_at_min) <= 0.5;
  const bool clear_ok = clear.min_approach > 2.0;

  const TrafficSpace space = make_intersection();
  const ModelParams params = ModelParams::defaults();
  int collided = 0, logged = 0, agents_total = 0;
  for (int seed = 1; seed <= 100; ++seed) {
    SpawnSpec spec;
    spec.duration = 40.0;
    spec.seed = static_cast<std::uint64_t>(seed);
    for (const auto& [e, x] : std::vector<std::pair<const char*, const char*>>{
             {"N", "S"}, {"S", "N"}, {"E", "W"}, {"W", "E"}, {"S", "W"}, {"N", "E"}, {"E", "S"}, {"W", "N"}}) {
      spec.routes.push_back({e, x, AgentKind::car, 0.05});
    }
    spec.routes.push_back({"NE", "NW", AgentKind::pedestrian, 0.03});
    spec.routes.push_back({"SW", "SE", AgentKind::pedestrian, 0.03});
    World w = build_world_from_spawn(space, spec, params);
    agents_total += static_cast<int>(w.agents.size());
    std::map<int, const Agent*> by_id;
    for (const auto& a : w.agents) by_id[a.id] = &a;
    SimConfig sim;
    sim.duration = 70.0;
    sim.seed = spec.seed;
    const SimLog log = run_scenario(w, sim);
    if (!log.collisions.empty()) ++logged;
    bool hit = false;
    for (std::size_t i = 0; i < log.rows.size() && !hit;) {
      std::vector<const LogRow*> frame;
      const long long f = log.rows[i].frame;
      for (; i < log.rows.size() && log.rows[i].frame == f; ++i) frame.push_back(&log.rows[i]);
      hit = footprint_collision(frame, by_id);
    }
    if (hit) ++collided;
  }
  return {stop_ok && clear_ok && collided == 0 && logged == 0,
          "simultaneous arrival: min speed " + fmt(conflict.min_speed, 3) + " m/s at " + fmt(conflict.gap_at_min, 3) +
              " m from the yield line; clear gap: min approach speed " + fmt(clear.min_approach, 3) +
              " m/s; 100 scenes (" + std::to_string(agents_total) + " agents): " + std::to_string(collided) +
              " with footprint overlap, " + std::to_string(logged) + " with logged collisions"};
}

// ---------------------------------------------------------------------------
// 7. Lateral variance

Outcome criterion7() {
  const TrafficSpace space = make_intersection();
  const ModelParams params = ModelParams::defaults();
  World w;
  w.space = &space;
  w.params = params;
  const double lane_half = 0.5 * space.lane("in_S")->width;
  for (int i = 0; i < 50; ++i) {
    const double cap = std::max(0.0, lane_half - 0.5 * params.car.width - 0.15);
    Agent a = oracle::lane_agent(space, i + 1, "S", "N", AgentKind::car, params, 2.25, 0.8 * params.car.v0,
                                 draw_preferred_offset(1, i + 1, params.car.lateral_sigma, cap));
    a.spawn_time = 4.0 * i;
    a.wait_for_clear_spawn = true;
    w.agents.push_back(std::move(a));
  }
  SimConfig sim;
  sim.duration = 4.0 * 50 + 20.0;
  const SimLog log = run_scenario(std::move(w), sim);
  // The S->N route runs along x = +lane_half; the mid-route cross-section is y = 0.
  std::map<int, std::vector<const LogRow*>> rows;
  double worst_edge = 0.0;
  for (const auto& r : log.rows) {
    rows[r.agent_id].push_back(&r);
    worst_edge = std::max(worst_edge, std::abs(r.x - lane_half) + 0.5 * params.car.width);
  }
  std::vector<double> offsets;
  for (const auto& [id, rs] : rows) {
    for (std::size_t k = 1; k < rs.size(); ++k) {
      if (rs[k - 1]->y < 0.0 && rs[k]->y >= 0.0) {
        const double u = -rs[k - 1]->y / (rs[k]->y - rs[k - 1]->y);
        offsets.push_back(rs[k - 1]->x + u * (rs[k]->x - rs[k - 1]->x) - lane_half);
        break;
      }
    }
  }
  const double sd = offsets.size() > 1 ? oracle::stddev(offsets) : 0.0;
  return {offsets.size() == 50 && sd > 0.05 && worst_edge <= lane_half && log.collisions.empty(),
          std::to_string(offsets.size()) + " vehicles crossed mid-route, lateral offset sd " + fmt(sd) +
              " m, max |offset| + half width " + fmt(worst_edge) + " m (lane half width " + fmt(lane_half) + ")"};
}

// ---------------------------------------------------------------------------
// 8. GA

Outcome criterion8() {
  const auto t_start = std::chrono::steady_clock::now();
  // Gene names only need to be valid parameter names; the fitness ignores them.
  ParamSpec named;
  for (int i = 0; i < 5; ++i) named.genes.push_back({ModelParams::names()[static_cast<std::size_t>(i)], -5.0, 5.0});
  GAConfig cfg;
  cfg.population = 50;
  cfg.generations = 200;
  cfg.seed = 7;
  const FitnessFn sphere = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  };
  bool in_bounds = true;
  const GAObserver check = [&](int, const std::vector<std::vector<double>>& pop) {
    for (const auto& x : pop) {
      for (double v : x) in_bounds = in_bounds && v >= -5.0 && v <= 5.0;
    }
  };
  const GAResult serial = run_ga(named, cfg, sphere, {}, check);
  cfg.threads = 4;
  const GAResult parallel = run_ga(named, cfg, sphere);
  bool monotone = true;
  for (std::size_t g = 1; g < serial.history.size(); ++g) monotone = monotone && serial.history[g].best <= serial.history[g - 1].best;
  const bool same = serial.history == parallel.history && serial.best == parallel.best;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {serial.best_fitness <= 1e-2 && monotone && same && in_bounds && secs < 120.0,
          "best " + fmt(serial.best_fitness, 3) + " after " + std::to_string(serial.history.size() - 1) +
              " generations, best-so-far " + (monotone ? "non-increasing" : "INCREASES") + ", parallel history " +
              (same ? "identical" : "DIFFERS") + ", bounds " + (in_bounds ? "kept" : "VIOLATED") + ", " +
              fmt(secs, 3) + " s"};
}

// ---------------------------------------------------------------------------
// 9. Replay

Outcome criterion9() {
  const auto& fx = fixture();
  const ConcreteScenario* scn = nullptr;
  for (const auto& s : fx.result.scenarios) {
    if (s.core.category == ScenarioCategory::v2v) {
      scn = &s;
      break;
    }
  }
  if (!scn) return {false, "no v2v scenario in the fixture"};
  ReplayConfig cfg;
  const int ego = scn->core.ego_track_id;
  const Track& ego_track = *scn->participant(ego);
  const double fr = scn->frame_rate;

  RecordedEgoPolicy self;
  const ReplaySession pure = run_adaptive(*scn, ego, fx.space, self, cfg);
  double max_d = 0.0;
  for (const auto& [f, d] : pure.trace) max_d = std::max(max_d, d);
  const bool self_ok = !pure.trigger && pure.mode == SessionMode::replay;

  const double start = 1.02, rate = 0.9;
  LateralRampPolicy ramp(start, rate);
  const ReplaySession s = run_adaptive(*scn, ego, fx.space, ramp, cfg);
  const double t_star = static_cast<double>(ego_track.initial_frame) / fr + start + cfg.dissimilarity.threshold / rate;
  const auto expected = static_cast<long long>(std::ceil(t_star * fr));
  std::optional<long long> scanned;
  for (const auto& [f, d] : s.trace) {
    if (d > cfg.dissimilarity.threshold) {
      scanned = f;
      break;
    }
  }
  const bool trigger_ok = s.trigger && std::llabs(s.trigger->frame - expected) <= 1 && scanned == s.trigger->frame;
  const long long trig = s.trigger ? s.trigger->frame : 0;

  // Non-ego rows before the trigger against the pure replay and the recording.
  std::map<std::pair<long long, int>, LogRow> pure_rows;
  for (const auto& r : pure.log.rows) pure_rows[{r.frame, r.agent_id}] = r;
  std::size_t compared = 0, differing = 0;
  for (const auto& r : s.log.rows) {
    if (r.agent_id == ego || r.frame >= trig) continue;
    ++compared;
    const auto it = pure_rows.find({r.frame, r.agent_id});
    const Track* t = scn->participant(r.agent_id);
    const bool same_as_pure = it != pure_rows.end() && it->second == r;
    const bool same_as_rec = t && t->has_frame(r.frame) && t->at_frame(r.frame).position.x == r.x &&
                             t->at_frame(r.frame).position.y == r.y;
    if (!same_as_pure || !same_as_rec) ++differing;
  }

  // Mode monotonicity per agent and for the session.
  std::map<int, AgentMode> last;
  bool monotone = true;
  int session_switches = 0;
  std::optional<SessionMode> prev;
  for (const auto& r : s.rows) {
    auto it = last.find(r.row.agent_id);
    if (it != last.end() && it->second == AgentMode::agent && r.row.mode == AgentMode::replayed) monotone = false;
    last[r.row.agent_id] = r.row.mode;
    if (prev && *prev != r.mode) {
      ++session_switches;
      if (r.mode == SessionMode::replay) monotone = false;
    }
    prev = r.mode;
  }

  const PolicyFactory factory = [&] { return std::make_unique<LateralRampPolicy>(start, rate); };
  const auto rewound = rewind_and_vary(*scn, s, fx.space, factory, 0.0, {}, cfg);
  std::vector<SessionRow> a, b;
  for (const auto& r : s.rows) {
    if (r.row.frame >= trig) a.push_back(r);
  }
  for (const auto& r : rewound.front().rows) {
    if (r.row.frame >= trig) b.push_back(r);
  }
  bool post_same = a.size() == b.size() && !a.empty();
  for (std::size_t i = 0; post_same && i < a.size(); ++i) {
    post_same = a[i].row == b[i].row && a[i].mode == b[i].mode && a[i].dissimilarity == b[i].dissimilarity;
  }

  const bool pass = self_ok && trigger_ok && compared > 0 && differing == 0 && monotone && session_switches <= 1 &&
                    post_same && rewound.size() == 1;
  return {pass, std::string("self-replay ") + (self_ok ? "no trigger" : "TRIGGERED") + " (max dissimilarity " +
                    fmt(max_d, 3) + "); ramp trigger frame " + (s.trigger ? std::to_string(trig) : "none") +
                    " vs analytic " + std::to_string(expected) + ", trace scan " +
                    (scanned ? std::to_string(*scanned) : "none") + "; pre-trigger non-ego rows " +
                    std::to_string(compared - differing) + "/" + std::to_string(compared) + " identical; " +
                    std::to_string(session_switches) + " mode transition(s); rewind 0 post-trigger " +
                    (post_same ? "identical" : "DIFFERS") + " (" + std::to_string(b.size()) + " rows)"};
}

// ---------------------------------------------------------------------------
// 10. Determinism and round trips

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const char* sub : {"scenarios", "logs", "reports"}) {
    if (!fs::exists(dir / sub)) continue;
    for (const auto& e : fs::recursive_directory_iterator(dir / sub)) {
      if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = oracle::slurp(e.path());
    }
  }
  return out;
}

Outcome criterion10() {
  const fs::path root = fs::temp_directory_path() / ("junction-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::string fixtures = oracle::fixture_dir().string();
  std::ostringstream sink;
  auto cli = [&](std::vector<std::string> args, const std::string& out_root, const std::string& id) {
    args.push_back("--set");
    args.push_back("paths.output=" + out_root);
    args.push_back("--set");
    args.push_back("run.id=" + id);
    return cli::run(args, sink, sink);
  };
  std::vector<std::string> fails;
  int compared_files = 0, runs = 0;
  std::string scenario_file;
  std::string scenarios_dir = (root / "a" / "extract" / "scenarios").string();
  const std::vector<std::pair<std::string, std::function<std::vector<std::string>()>>> commands = {
      {"extract", [&] { return std::vector<std::string>{"extract", "-c", fixtures + "/extract.conf"}; }},
      {"simulate",
       [&] { return std::vector<std::string>{"simulate", "-c", fixtures + "/simulate.conf", "--set", "sim.duration=30"}; }},
      {"calibrate",
       [&] {
         return std::vector<std::string>{"calibrate", "-c", fixtures + "/calibrate.conf", "--set", "ga.generations=2",
                                         "--set", "ga.population=6", "--set", "ga.threads=2"};
       }},
      {"replay",
       [&] {
         return std::vector<std::string>{"replay", "-c", fixtures + "/extract.conf", "--set", "replay.scenario=" + scenario_file,
                                         "--set", "replay.variations=2", "--set", "replay.threads=2"};
       }},
      {"stats", [&] { return std::vector<std::string>{"stats", "--set", "paths.scenarios=" + scenarios_dir}; }},
      {"sample",
       [&] {
         return std::vector<std::string>{"sample", "--set", "paths.scenarios=" + scenarios_dir, "--set",
                                         "sample.functional_type=v2p:cross", "--set", "sample.n=50"};
       }},
  };
  for (const auto& [name, args] : commands) {
    if (name == "replay") {
      for (const auto& s : fixture().result.scenarios) {
        if (s.core.category == ScenarioCategory::v2v) {
          // Any stored v2v scenario; the file names are content hashes.
          for (const auto& e : fs::directory_iterator(scenarios_dir)) {
            if (e.path().extension() == ".json" && e.path().filename() != "index.json" &&
                oracle::slurp(e.path()).find("\"v2v\"") != std::string::npos) {
              scenario_file = e.path().string();
              break;
            }
          }
          break;
        }
      }
    }
    const int ra = cli(args(), (root / "a").string(), name);
    const int rb = cli(args(), (root / "b").string(), name);
    ++runs;
    if (ra != 0 || rb != 0) {
      fails.push_back(name + " exit " + std::to_string(ra) + "/" + std::to_string(rb));
      continue;
    }
    const auto ta = tree(root / "a" / name), tb = tree(root / "b" / name);
    if (ta != tb || ta.empty()) fails.push_back(name + " artifacts differ");
    compared_files += static_cast<int>(ta.size());
  }

  // Scenario JSON round trip, in memory and through the database written above.
  int roundtrips = 0, roundtrip_fail = 0;
  for (const auto& s : fixture().result.scenarios) {
    const ScenarioRecord rec{s, {ScenarioSource::real, "0.3.0", "cafe"}};
    const std::string text = scenario_to_json(rec);
    const ScenarioRecord back = scenario_from_json(text);
    ++roundtrips;
    if (!(back == rec) || scenario_to_json(back) != text) ++roundtrip_fail;
  }
  if (fs::exists(scenarios_dir)) {
    const ScenarioDatabase db(scenarios_dir);
    std::map<std::pair<int, int>, const ConcreteScenario*> by_pair;
    for (const auto& s : fixture().result.scenarios) by_pair[{s.core.ego_track_id, s.core.challenger_track_id}] = &s;
    for (const auto& id : db.ids()) {
      const auto rec = db.load(id);
      ++roundtrips;
      const auto it = by_pair.find({rec.scenario.core.ego_track_id, rec.scenario.core.challenger_track_id});
      if (it == by_pair.end() || !(rec.scenario == *it->second)) ++roundtrip_fail;
    }
  }
  if (roundtrip_fail) fails.push_back(std::to_string(roundtrip_fail) + " scenario round trips differ");

  // Five-number summaries against a sort-based oracle.
  std::mt19937_64 rng(1010);
  std::vector<double> pets(1000);
  for (auto& p : pets) p = uniform(rng, 0.0, 6.5);
  const auto got = five_number_summary("x", pets);
  std::vector<double> sorted = pets;
  std::sort(sorted.begin(), sorted.end());
  double dev = std::max({std::abs(got.min - sorted.front()), std::abs(got.max - sorted.back()),
                         std::abs(got.q1 - oracle::sorted_quantile(sorted, 0.25)),
                         std::abs(got.median - oracle::sorted_quantile(sorted, 0.5)),
                         std::abs(got.q3 - oracle::sorted_quantile(sorted, 0.75))});
  // Per-type summaries of the extracted scenarios.
  std::map<std::string, std::vector<double>> groups;
  for (const auto& s : fixture().result.scenarios) {
    if (s.core.pet.pet) groups[s.core.functional_type.key()].push_back(*s.core.pet.pet);
  }
  for (const auto& row : pet_stats(fixture().result.scenarios)) {
    auto g = groups[row.type];
    std::sort(g.begin(), g.end());
    if (g.size() != row.count || g.empty()) {
      dev = 1.0;
      continue;
    }
    dev = std::max({dev, std::abs(row.min - g.front()), std::abs(row.max - g.back()),
                    std::abs(row.q1 - oracle::sorted_quantile(g, 0.25)),
                    std::abs(row.median - oracle::sorted_quantile(g, 0.5)),
                    std::abs(row.q3 - oracle::sorted_quantile(g, 0.75))});
  }
  if (!(dev <= 1e-12)) fails.push_back("five-number summary deviation " + fmt(dev, 3));
  fs::remove_all(root);

  std::string detail = std::to_string(runs) + " subcommands run twice, " + std::to_string(compared_files) +
                       " artifacts compared; " + std::to_string(roundtrips - roundtrip_fail) + "/" +
                       std::to_string(roundtrips) + " scenario round trips exact; five-number max deviation " +
                       fmt(dev, 3);
  for (const auto& f : fails) detail += "; failed: " + f;
  return {fails.empty(), detail};
}

}  // namespace

// Optional arguments select criteria by number; the default runs all of them.
int main(int argc, char** argv) {
  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(static_cast<std::size_t>(std::atoi(argv[i])));
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"PET oracle equivalence", criterion1},        {"planted extraction", criterion2},
      {"maneuver labeling", criterion3},             {"force-model analytics", criterion4},
      {"single-track geometry", criterion5},         {"priority emergence", criterion6},
      {"trajectory variance", criterion7},           {"GA", criterion8},
      {"replay-to-sim", criterion9},                 {"determinism and round trip", criterion10},
  };
  int failed = 0;
  std::size_t ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.contains(i + 1)) continue;
    ++ran;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << i + 1 << " [" << criteria[i].first << "]: " << (o.pass ? "PASS" : "FAIL") << " - "
              << o.detail << std::endl;
  }
  std::cout << (ran - static_cast<std::size_t>(failed)) << "/" << ran << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
