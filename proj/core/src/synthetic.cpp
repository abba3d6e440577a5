#include "junction/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "junction/csv.hpp"

namespace junction {

namespace {

const char* const kArms[] = {"E", "N", "W", "S"};

struct Arm {
  std::string label;
  Vec2 out;    // unit vector from the center along the arm
  Vec2 right;  // right-hand side for inbound traffic
};

Arm arm(const std::string& label) {
  const Vec2 u = Vec2::from_angle(compass_angle(label));
  // Snap the tiny cos/sin residue so the geometry is exactly axis aligned.
  const Vec2 out{std::round(u.x), std::round(u.y)};
  const Vec2 d = -out;
  return {label, out, Vec2{d.y, -d.x}};
}

std::vector<Vec2> sample_segment(Vec2 a, Vec2 b, double spacing) {
  const int n = std::max(1, static_cast<int>(std::ceil(distance(a, b) / spacing)));
  std::vector<Vec2> pts;
  for (int i = 0; i <= n; ++i) pts.push_back(a + (b - a) * (static_cast<double>(i) / n));
  return pts;
}

std::vector<Vec2> sample_bezier(Vec2 p0, Vec2 c, Vec2 p2, double spacing) {
  const double approx = distance(p0, c) + distance(c, p2);
  const int n = std::max(2, static_cast<int>(std::ceil(approx / spacing)));
  std::vector<Vec2> pts;
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    pts.push_back(p0 * ((1 - t) * (1 - t)) + c * (2 * (1 - t) * t) + p2 * (t * t));
  }
  return pts;
}

}  // namespace

TrafficSpace make_intersection(const IntersectionOptions& opt) {
  TrafficSpace space;
  space.id = opt.id;
  const double half = 0.5 * opt.lane_width;
  const double edge = opt.junction_edge;
  const double end = opt.arm_length;
  const std::set<AgentKind> vehicles{AgentKind::car, AgentKind::truck, AgentKind::bus, AgentKind::bicycle};

  for (const char* b : kArms) {
    const Arm a = arm(b);
    const bool minor = a.label == "E" || a.label == "W";
    Lane in;
    in.id = std::string("in_") + b;
    in.centerline = Polyline(sample_segment(a.out * end + a.right * half, a.out * edge + a.right * half, 1.0));
    in.width = opt.lane_width;
    in.speed_limit = opt.speed_limit;
    in.priority_rank = minor ? 1 : 0;
    if (minor) in.yield_s = in.centerline.length() - 0.5;
    in.kinds = vehicles;
    for (const char* x : kArms) {
      if (std::string(x) != b) in.successors.push_back(std::string("c_") + b + "_" + x);
    }
    space.lanes.push_back(std::move(in));

    Lane out;
    out.id = std::string("out_") + b;
    out.centerline = Polyline(sample_segment(a.out * edge - a.right * half, a.out * end - a.right * half, 1.0));
    out.width = opt.lane_width;
    out.speed_limit = opt.speed_limit;
    out.priority_rank = 0;
    out.kinds = vehicles;
    space.lanes.push_back(std::move(out));
  }

  for (const char* b : kArms) {
    const Arm from = arm(b);
    for (const char* x : kArms) {
      if (std::string(x) == b) continue;
      const Arm to = arm(x);
      const Vec2 p0 = from.out * edge + from.right * half;
      const Vec2 p2 = to.out * edge - to.right * half;
      const Vec2 d0 = -from.out;
      const Vec2 d2 = to.out;
      std::vector<Vec2> pts;
      const double denom = d0.cross(d2);
      if (std::abs(denom) < 1e-9) {
        pts = sample_segment(p0, p2, 0.5);
      } else {
        const double t = (p2 - p0).cross(d2) / denom;
        pts = sample_bezier(p0, p0 + d0 * t, p2, 0.5);
      }
      Lane c;
      c.id = std::string("c_") + b + "_" + x;
      c.centerline = Polyline(std::move(pts));
      c.width = opt.lane_width;
      c.speed_limit = opt.speed_limit;
      c.priority_rank = (from.label == "E" || from.label == "W") ? 1 : 0;
      c.successors = {std::string("out_") + x};
      c.kinds = vehicles;
      space.lanes.push_back(std::move(c));
    }
  }

  if (opt.crosswalks) {
    const double mid = 0.5 * (opt.crosswalk_near + opt.crosswalk_far);
    const double span = opt.crosswalk_half_span;
    for (const char* b : kArms) {
      const Arm a = arm(b);
      space.crosswalks.push_back({a.out * opt.crosswalk_near - a.right * span, a.out * opt.crosswalk_near + a.right * span,
                                  a.out * opt.crosswalk_far + a.right * span, a.out * opt.crosswalk_far - a.right * span});
      const double reach = span + 5.5;
      for (int k = 0; k < 2; ++k) {
        const double off = mid + (k == 0 ? -0.5 : 0.5);
        const Vec2 side = k == 0 ? a.right : -a.right;
        Lane w;
        w.id = std::string("xw_") + b + "_" + std::to_string(k);
        w.centerline = Polyline(sample_segment(a.out * off - side * reach, a.out * off + side * reach, 1.0));
        w.width = 3.0;
        w.speed_limit = 2.0;
        w.priority_rank = -1;
        w.kinds = {AgentKind::pedestrian};
        space.lanes.push_back(std::move(w));
      }
    }
  }

  for (const char* b : kArms) {
    space.reference_points.push_back({b, arm(b).out * end, vehicles});
  }
  const double corner = opt.crosswalk_near - 1.0;
  for (const char* c : {"NE", "NW", "SE", "SW"}) {
    const Vec2 u = Vec2::from_angle(compass_angle(c));
    const Vec2 p{u.x > 0 ? corner : -corner, u.y > 0 ? corner : -corner};
    space.reference_points.push_back({c, p, {AgentKind::pedestrian}});
  }
  space.finalize();
  return space;
}

Polyline lane_route_path(const TrafficSpace& space, const std::string& entry, const std::string& exit, AgentKind kind) {
  const auto lanes = space.route_lanes(entry, exit, kind);
  if (lanes.empty()) throw ConfigError("no lane route " + entry + exit + " in traffic space " + space.id);
  std::vector<Vec2> pts;
  for (const auto& id : lanes) {
    const auto& p = space.lane_or_throw(id).centerline.points();
    pts.insert(pts.end(), p.begin(), p.end());
  }
  return Polyline(std::move(pts));
}

// ---------------------------------------------------------------------------

std::vector<SpeedProfile::Phase> SpeedProfile::phases() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<Phase> ph;
  double t = 0.0;
  if (initial_wait > 0.0) {
    ph.push_back({t, 0.0, 0.0, 0.0, initial_wait});
    t += initial_wait;
  }
  if (!stop_s) {
    ph.push_back({t, 0.0, cruise, 0.0, inf});
    return ph;
  }
  const double brake_len = cruise * cruise / (2.0 * decel);
  const double s_brake = std::max(0.0, *stop_s - brake_len);
  const double v_brake = s_brake > 0.0 ? cruise : std::sqrt(2.0 * decel * *stop_s);
  if (s_brake > 0.0) {
    ph.push_back({t, 0.0, cruise, 0.0, s_brake / cruise});
    t += s_brake / cruise;
  }
  ph.push_back({t, s_brake, v_brake, -decel, v_brake / decel});
  t += v_brake / decel;
  ph.push_back({t, *stop_s, 0.0, 0.0, stop_wait});
  t += stop_wait;
  ph.push_back({t, *stop_s, 0.0, accel, cruise / accel});
  t += cruise / accel;
  ph.push_back({t, *stop_s + cruise * cruise / (2.0 * accel), cruise, 0.0, inf});
  return ph;
}

const SpeedProfile::Phase& SpeedProfile::phase_at(const std::vector<Phase>& ph, double t) const {
  for (std::size_t i = 0; i + 1 < ph.size(); ++i) {
    if (t < ph[i + 1].t0) return ph[i];
  }
  return ph.back();
}

double SpeedProfile::s_at(double t) const {
  if (t <= 0.0) return 0.0;
  const auto ph = phases();
  const auto& p = phase_at(ph, t);
  const double dt = std::min(t - p.t0, p.duration);
  return p.s0 + p.v0 * dt + 0.5 * p.a * dt * dt;
}

double SpeedProfile::v_at(double t) const {
  if (t < 0.0) return 0.0;
  const auto ph = phases();
  const auto& p = phase_at(ph, t);
  return std::max(0.0, p.v0 + p.a * std::min(t - p.t0, p.duration));
}

double SpeedProfile::a_at(double t) const {
  if (t < 0.0) return 0.0;
  const auto ph = phases();
  return phase_at(ph, t).a;
}

double SpeedProfile::time_at(double s) const {
  if (s <= 0.0) return initial_wait;
  const auto ph = phases();
  for (const auto& p : ph) {
    const double dt_end = std::isfinite(p.duration) ? p.duration : 0.0;
    const double s_end = p.s0 + p.v0 * dt_end + 0.5 * p.a * dt_end * dt_end;
    if (std::isfinite(p.duration) && s_end < s) continue;
    if (p.a == 0.0) {
      if (p.v0 <= 0.0) continue;
      return p.t0 + (s - p.s0) / p.v0;
    }
    // s0 + v0 t + a t^2 / 2 = s, smallest non-negative root
    const double disc = std::max(0.0, p.v0 * p.v0 + 2.0 * p.a * (s - p.s0));
    return p.t0 + (-p.v0 + std::sqrt(disc)) / p.a;
  }
  return ph.back().t0;
}

Track scripted_track(int track_id, AgentKind kind, const Polyline& path, const SpeedProfile& profile, double t0,
                     double frame_rate, double length, double width) {
  Track t;
  t.track_id = track_id;
  t.kind = kind;
  t.length = length;
  t.width = width;
  const double total = path.length();
  auto f = static_cast<long long>(std::ceil(t0 * frame_rate - 1e-9));
  while (true) {
    const double tl = static_cast<double>(f) / frame_rate - t0;
    const double s = std::min(profile.s_at(tl), total);
    const double v = s < total ? profile.v_at(tl) : 0.0;
    const Vec2 tan = path.tangent_at(s);
    TrackSample smp;
    smp.frame = f;
    smp.position = path.point_at(s);
    smp.heading = std::atan2(tan.y, tan.x);
    smp.velocity = tan * v;
    smp.acceleration = s < total ? tan * profile.a_at(tl) : Vec2{};
    t.samples.push_back(smp);
    if (s >= total) break;
    ++f;
  }
  finalize_track(t);
  return t;
}

std::optional<double> first_contact_s(const Polyline& a, const Polyline& b, double reach, double step) {
  for (double s = 0.0; s <= a.length(); s += step) {
    if (b.project(a.point_at(s)).distance <= reach) return s;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kEgoSpeed = 10.0;
constexpr double kEgoStart = 5.0;  // seconds into the slot
constexpr double kSlotSeconds = 40.0;

struct ChallengerSpec {
  AgentKind kind;
  std::string entry, exit;  // branch route for vehicles and bicycles
  std::string crosswalk;    // arm whose crosswalk a pedestrian crosses
  bool reverse = false;     // pedestrian direction along the crosswalk
};

struct PairSpec {
  ScenarioCategory category;
  std::string ego_entry, ego_exit;
  ChallengerSpec challenger;
  std::string type;
  double gap;
  bool decoy;
};

Polyline crosswalk_path(const std::string& b, bool reverse, const IntersectionOptions& opt) {
  const Arm a = arm(b);
  const double mid = 0.5 * (opt.crosswalk_near + opt.crosswalk_far);
  const double reach = opt.crosswalk_half_span + 2.5;
  Vec2 p = a.out * mid - a.right * reach;
  Vec2 q = a.out * mid + a.right * reach;
  if (reverse) std::swap(p, q);
  return Polyline(sample_segment(p, q, 0.5));
}

ChallengerSpec road(AgentKind kind, const char* entry, const char* exit) { return {kind, entry, exit, "", false}; }
ChallengerSpec walk(const char* crosswalk, bool reverse) { return {AgentKind::pedestrian, "", "", crosswalk, reverse}; }

std::vector<PairSpec> planted_specs() {
  using C = ScenarioCategory;
  const AgentKind car = AgentKind::car, bike = AgentKind::bicycle;
  return {
      {C::v2v, "S", "N", road(car, "W", "E"), "SCP/left", 1.5, false},
      {C::v2v, "S", "N", road(car, "E", "W"), "SCP/right", 1.5, false},
      {C::v2v, "S", "W", road(car, "N", "S"), "LTAP/OD", 1.5, false},
      {C::v2v, "S", "W", road(car, "W", "E"), "LTAP/LD", 1.5, false},
      {C::v2v, "S", "W", road(car, "E", "W"), "turn-into/LD", 1.5, false},
      {C::v2v, "S", "E", road(car, "W", "E"), "RTAP/LD", 1.3, false},
      {C::v2v, "S", "W", road(car, "N", "W"), "turn-into/OD", 1.5, false},
      {C::v2v, "S", "W", road(car, "E", "S"), "merging-turns", 1.5, false},
      {C::v2p, "S", "N", walk("S", false), "cross", 3.0, false},
      {C::v2p, "S", "N", walk("N", false), "cross", 3.0, false},
      {C::v2p, "S", "E", walk("E", true), "cross", 3.0, false},
      {C::v2p, "S", "W", walk("W", false), "cross", 3.0, false},
      {C::v2p, "S", "N", walk("S", true), "cross", 2.0, false},
      {C::v2p, "S", "W", walk("S", false), "cross", 2.0, false},
      {C::v2b, "S", "N", road(bike, "W", "E"), "SCP/left", 2.5, false},
      {C::v2b, "S", "N", road(bike, "E", "W"), "SCP/right", 2.5, false},
      {C::v2b, "S", "W", road(bike, "N", "S"), "LTAP/OD", 2.5, false},
      {C::v2b, "S", "E", road(bike, "W", "E"), "RTAP/LD", 2.5, false},
      {C::v2b, "S", "W", road(bike, "W", "E"), "LTAP/LD", 2.5, false},
      {C::v2b, "S", "W", road(bike, "E", "W"), "turn-into/LD", 2.5, false},
      // Decoys: the challenger waits (at the yield line or the curb) until long after the ego.
      {C::v2v, "S", "N", road(car, "W", "E"), "SCP/left", 10.0, true},
      {C::v2v, "S", "N", road(car, "E", "W"), "SCP/right", 10.0, true},
      {C::v2v, "S", "E", road(car, "W", "E"), "RTAP/LD", 10.0, true},
      {C::v2b, "S", "N", road(bike, "W", "E"), "SCP/left", 10.0, true},
      {C::v2b, "S", "N", road(bike, "E", "W"), "SCP/right", 10.0, true},
      {C::v2b, "S", "W", road(bike, "N", "S"), "LTAP/OD", 10.0, true},
      {C::v2p, "S", "N", walk("S", false), "cross", 10.0, true},
      {C::v2p, "S", "N", walk("N", true), "cross", 10.0, true},
      {C::v2p, "S", "E", walk("E", false), "cross", 10.0, true},
      {C::v2p, "S", "W", walk("W", true), "cross", 10.0, true},
  };
}

}  // namespace

PlantedRecording make_planted_recording(const TrafficSpace& space, double frame_rate) {
  const IntersectionOptions geo;
  const FootprintConfig fp;
  PlantedRecording out;
  out.recording.recording_id = 1;
  out.recording.frame_rate = frame_rate;
  out.recording.traffic_space_id = space.id;

  const auto specs = planted_specs();
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto& spec = specs[k];
    const double slot = kSlotSeconds * static_cast<double>(k);
    const int ego_id = static_cast<int>(2 * k + 1);
    const int chal_id = ego_id + 1;
    const auto& cs = spec.challenger;

    const Polyline ego_path = lane_route_path(space, spec.ego_entry, spec.ego_exit, AgentKind::car);
    SpeedProfile ego_profile;
    ego_profile.cruise = kEgoSpeed;

    Polyline chal_path;
    double chal_len = 0.0, chal_wid = 0.0, chal_speed = 0.0;
    if (cs.kind == AgentKind::pedestrian) {
      chal_path = crosswalk_path(cs.crosswalk, cs.reverse, geo);
      chal_speed = 1.34;
    } else {
      chal_path = lane_route_path(space, cs.entry, cs.exit, cs.kind);
      const bool bike = cs.kind == AgentKind::bicycle;
      chal_len = bike ? fp.default_bicycle_length : fp.default_vehicle_length;
      chal_wid = bike ? fp.default_bicycle_width : fp.default_vehicle_width;
      chal_speed = bike ? 5.0 : kEgoSpeed;
    }

    const double reach = 0.5 * fp.default_vehicle_width +
                         (cs.kind == AgentKind::pedestrian ? fp.pedestrian_radius : 0.5 * chal_wid);
    const auto se = first_contact_s(ego_path, chal_path, reach);
    const auto sc = first_contact_s(chal_path, ego_path, reach);
    if (!se || !sc) throw ConfigError("planted pair " + std::to_string(k) + ": paths do not meet");
    const double t_ego = kEgoStart + ego_profile.time_at(*se);

    SpeedProfile chal_profile;
    chal_profile.cruise = chal_speed;
    double t0 = 0.0;
    if (!spec.decoy) {
      t0 = t_ego + spec.gap - chal_profile.time_at(*sc);
    } else if (cs.kind == AgentKind::pedestrian) {
      // Stand at the curb from the slot start, then walk.
      chal_profile.initial_wait = t_ego + spec.gap - chal_profile.time_at(*sc);
    } else {
      // Stop with the front at the yield line, arriving well before the ego passes.
      const double yield = space.lane_or_throw("in_" + cs.entry).yield_s.value_or(*sc - 2.0);
      chal_profile.stop_s = yield - 0.5 * chal_len;
      t0 = std::max(0.5, t_ego - 2.0 - chal_profile.time_at(*chal_profile.stop_s));
      chal_profile.stop_wait = t_ego + spec.gap - (t0 + chal_profile.time_at(*sc));
    }
    if (t0 < 0.0 || chal_profile.initial_wait < 0.0 || chal_profile.stop_wait < 0.0) {
      throw ConfigError("planted pair " + std::to_string(k) + ": challenger cannot be scheduled");
    }

    out.recording.tracks.push_back(scripted_track(ego_id, AgentKind::car, ego_path, ego_profile, slot + kEgoStart,
                                                  frame_rate, fp.default_vehicle_length, fp.default_vehicle_width));
    out.recording.tracks.push_back(
        scripted_track(chal_id, cs.kind, chal_path, chal_profile, slot + t0, frame_rate, chal_len, chal_wid));
    out.pairs.push_back({ego_id, chal_id, spec.category, spec.type, spec.gap, spec.decoy});
  }
  return out;
}

void write_planted_pairs(std::ostream& out, const std::vector<PlantedPair>& pairs) {
  csv::Writer w(out);
  w.row({"ego_id", "challenger_id", "category", "functional_type", "design_gap", "decoy"});
  for (const auto& p : pairs) {
    w.field(p.ego_id).field(p.challenger_id).field(to_string(p.category)).field(p.functional_type);
    w.field(p.design_gap).field(p.decoy ? 1 : 0);
    w.end_row();
  }
}

std::vector<PlantedPair> read_planted_pairs(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto table = csv::Table::parse(buf.str());
  auto col = [&](const char* name) {
    const auto c = table.column(name);
    if (!c) throw DataError(std::string("planted pairs: missing column ") + name);
    return *c;
  };
  const auto ce = col("ego_id"), cc = col("challenger_id"), ccat = col("category"), ct = col("functional_type"),
             cg = col("design_gap"), cd = col("decoy");
  std::vector<PlantedPair> pairs;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    PlantedPair p;
    p.ego_id = static_cast<int>(csv::parse_int(table.cell(r, ce), "ego_id"));
    p.challenger_id = static_cast<int>(csv::parse_int(table.cell(r, cc), "challenger_id"));
    const auto cat = parse_category(table.cell(r, ccat));
    if (!cat) throw DataError("planted pairs: bad category '" + table.cell(r, ccat) + "'");
    p.category = *cat;
    p.functional_type = table.cell(r, ct);
    p.design_gap = csv::parse_double(table.cell(r, cg), "design_gap");
    p.decoy = csv::parse_int(table.cell(r, cd), "decoy") != 0;
    pairs.push_back(p);
  }
  return pairs;
}

}  // namespace junction
