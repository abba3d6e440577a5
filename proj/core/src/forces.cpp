#include <algorithm>
#include <cmath>
#include <sstream>

#include "junction/simcore.hpp"

namespace junction {

// ---------------------------------------------------------------------------
// Route

Route Route::from_lanes(const TrafficSpace& space, const std::vector<std::string>& lane_ids, AgentKind kind) {
  (void)kind;
  if (lane_ids.empty()) throw DataError("route: empty lane sequence");
  Route r;
  std::vector<Vec2> pts;
  double acc = 0.0;
  for (const auto& id : lane_ids) {
    const Lane& lane = space.lane_or_throw(id);
    const auto& lp = lane.centerline.points();
    if (!pts.empty()) acc += distance(pts.back(), lp.front());
    r.lane_start_.push_back(acc);
    r.lanes_.push_back(id);
    r.speed_limits_.push_back(lane.speed_limit);
    r.widths_.push_back(lane.width);
    for (std::size_t i = 0; i < lp.size(); ++i) {
      if (i > 0) acc += distance(lp[i - 1], lp[i]);
      pts.push_back(lp[i]);
    }
  }
  r.path_ = Polyline(std::move(pts));

  for (const auto& c : space.conflicts()) {
    for (std::size_t k = 0; k < r.lanes_.size(); ++k) {
      const std::string& id = r.lanes_[k];
      std::string other;
      double own_s = 0.0, other_s = 0.0, own_in = 0.0, own_out = 0.0, other_in = 0.0, other_out = 0.0;
      if (c.lane_a == id) {
        other = c.lane_b;
        own_s = c.s_a;
        other_s = c.s_b;
        own_in = c.a_in;
        own_out = c.a_out;
        other_in = c.b_in;
        other_out = c.b_out;
      } else if (c.lane_b == id) {
        other = c.lane_a;
        own_s = c.s_b;
        other_s = c.s_a;
        own_in = c.b_in;
        own_out = c.b_out;
        other_in = c.a_in;
        other_out = c.a_out;
      } else {
        continue;
      }
      if (std::find(r.lanes_.begin(), r.lanes_.end(), other) != r.lanes_.end()) continue;
      YieldPoint y;
      y.own_lane = id;
      y.other_lane = other;
      y.other_lane_s = other_s;
      y.conflict_s = r.lane_start_[k] + own_s;
      y.zone_in = r.lane_start_[k] + own_in;
      y.zone_out = r.lane_start_[k] + own_out;
      y.other_in = other_in;
      y.other_out = other_out;
      y.must_yield = space.yields_to(id, other);
      y.merge = c.type == LaneConflict::Type::merge;
      double line = -kUnconstrained;
      for (std::size_t j = 0; j <= k; ++j) {
        const Lane& lj = space.lane_or_throw(r.lanes_[j]);
        if (!lj.yield_s) continue;
        const double ys = r.lane_start_[j] + *lj.yield_s;
        if (ys <= y.zone_in + 1e-9) line = std::max(line, ys);
      }
      y.stop_s = std::isfinite(line) ? line : y.zone_in - 0.5;
      // A crosswalk just past a short connecting lane is waited for before entering that lane,
      // not from inside the junction.
      const Lane& other_lane = space.lane_or_throw(other);
      const bool walkway = std::all_of(other_lane.kinds.begin(), other_lane.kinds.end(),
                                       [](AgentKind kk) { return kk == AgentKind::pedestrian; });
      if (walkway && k > 0 && own_in < 8.0 && r.lane_start_[k] - r.lane_start_[k - 1] < 40.0) {
        y.stop_s = std::min(y.stop_s, r.lane_start_[k - 1] - 0.5);
      }
      r.yields_.push_back(std::move(y));
    }
  }
  std::sort(r.yields_.begin(), r.yields_.end(), [](const YieldPoint& a, const YieldPoint& b) {
    if (a.conflict_s != b.conflict_s) return a.conflict_s < b.conflict_s;
    return a.other_lane < b.other_lane;
  });

  const double len = r.path_.length();
  for (std::size_t ci = 0; ci < space.crosswalks.size(); ++ci) {
    const auto& poly = space.crosswalks[ci];
    std::optional<double> first, last;
    for (double s = 0.0; s <= len; s += 0.25) {
      if (point_in_polygon(r.path_.point_at(s), poly)) {
        if (!first) first = s;
        last = s;
      }
    }
    if (first) r.crosswalks_.push_back({ci, *first, *last});
  }
  r.build_tables();
  return r;
}

Route Route::from_polyline(Polyline path, double width, double speed_limit) {
  Route r;
  r.path_ = std::move(path);
  r.lane_start_ = {0.0};
  r.speed_limits_ = {speed_limit};
  r.widths_ = {width};
  r.build_tables();
  return r;
}

void Route::build_tables() {
  const double len = path_.length();
  const auto n = static_cast<std::size_t>(std::floor(len)) + 1;
  curvature_.resize(n);
  for (std::size_t k = 0; k < n; ++k) curvature_[k] = path_.curvature_at(static_cast<double>(k));
}

std::optional<double> Route::lane_offset(const std::string& id) const {
  for (std::size_t k = 0; k < lanes_.size(); ++k) {
    if (lanes_[k] == id) return lane_start_[k];
  }
  return std::nullopt;
}

namespace {

std::size_t lane_at(const std::vector<double>& starts, double s) {
  auto it = std::upper_bound(starts.begin(), starts.end(), s);
  return it == starts.begin() ? 0 : static_cast<std::size_t>(it - starts.begin()) - 1;
}

}  // namespace

double Route::speed_limit_at(double s) const {
  return speed_limits_.empty() ? kUnconstrained : speed_limits_[lane_at(lane_start_, s)];
}

double Route::width_at(double s) const { return widths_.empty() ? 3.5 : widths_[lane_at(lane_start_, s)]; }

double Route::curvature_at(double s) const {
  if (curvature_.empty()) return 0.0;
  if (s <= 0.0) return curvature_.front();
  const auto i = static_cast<std::size_t>(std::floor(s));
  if (i + 1 >= curvature_.size()) return curvature_.back();
  const double f = s - static_cast<double>(i);
  return curvature_[i] * (1.0 - f) + curvature_[i + 1] * f;
}

// ---------------------------------------------------------------------------
// Diagnostics

std::string ForceBreakdown::describe() const {
  std::ostringstream o;
  o << "drive=" << drive << " leader=" << leader << " vru=" << vru << " stop=" << stop << " v_desired=" << v_desired
    << " v_curve=" << v_curve << " v_yield=" << v_yield << " lateral_target=" << lateral_target << " ped_drive=("
    << ped_drive.x << "," << ped_drive.y << ") ped_social=(" << ped_social.x << "," << ped_social.y << ") ped_wall=("
    << ped_wall.x << "," << ped_wall.y << ")" << (coincident ? " coincident" : "");
  return o.str();
}

const VehicleParams& vehicle_params_of(const World& world, const Agent& agent) {
  return agent.vehicle_params ? *agent.vehicle_params : world.params.vehicle(agent.kind);
}

const PedestrianParams& pedestrian_params_of(const World& world, const Agent& agent) {
  return agent.pedestrian_params ? *agent.pedestrian_params : world.params.pedestrian;
}

// ---------------------------------------------------------------------------
// Pedestrians

namespace {

Vec2 closest_on_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squared_norm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return a + ab * t;
}

// Closest boundary point; `inside` reports containment.
Vec2 closest_on_polygon(Vec2 p, std::span<const Vec2> poly, bool& inside) {
  inside = point_in_polygon(p, poly);
  Vec2 best = poly.front();
  double bd = kUnconstrained;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 q = closest_on_segment(p, poly[i], poly[(i + 1) % poly.size()]);
    const double d = distance(p, q);
    if (d < bd) {
      bd = d;
      best = q;
    }
  }
  return best;
}

struct Contribution {
  double key_d;
  Vec2 key_p;
  Vec2 f;
};

Vec2 ordered_sum(std::vector<Contribution>& c) {
  std::sort(c.begin(), c.end(), [](const Contribution& a, const Contribution& b) {
    if (a.key_d != b.key_d) return a.key_d < b.key_d;
    if (a.key_p.x != b.key_p.x) return a.key_p.x < b.key_p.x;
    return a.key_p.y < b.key_p.y;
  });
  Vec2 s;
  for (const auto& x : c) s += x.f;
  return s;
}

}  // namespace

PedestrianForce pedestrian_force(const AgentState& self, const PedestrianParams& p, Vec2 goal,
                                 const std::vector<Neighbor>& neighbors, const std::vector<Polygon>& obstacles) {
  PedestrianForce out;
  const Vec2 to_goal = goal - self.position;
  const Vec2 e = to_goal.norm() > 1e-9 ? to_goal.normalized() : Vec2{};
  out.terms.ped_drive = (e * p.v0 - self.velocity) / p.tau;

  std::vector<Contribution> social;
  for (const auto& n : neighbors) {
    if (n.footprint) {
      const auto outline = n.footprint->outline();
      bool inside = false;
      const Vec2 q = closest_on_polygon(self.position, outline, inside);
      double d = distance(self.position, q);
      Vec2 dir = inside ? self.position - n.footprint->center : self.position - q;
      if (inside) d = 0.0;
      if (dir.norm() < 1e-12) {
        dir = Vec2::from_angle(self.heading).left();
        out.terms.coincident = true;
      }
      social.push_back({d, n.position, dir.normalized() * (p.A * std::exp((p.radius - d) / p.B))});
      continue;
    }
    const Vec2 diff = self.position - n.position;
    const double d = diff.norm();
    if (d < 1e-12) {
      out.terms.coincident = true;
      const Vec2 dir = Vec2::from_angle(self.heading).left();
      social.push_back({0.0, n.position, dir * (p.A * std::exp((p.radius + n.radius) / p.B))});
      continue;
    }
    social.push_back({d, n.position, diff / d * (p.A * std::exp((p.radius + n.radius - d) / p.B))});
  }
  out.terms.ped_social = ordered_sum(social);

  std::vector<Contribution> walls;
  for (const auto& poly : obstacles) {
    if (poly.size() < 3) continue;
    bool inside = false;
    const Vec2 q = closest_on_polygon(self.position, poly, inside);
    const double d = distance(self.position, q);
    Vec2 dir = inside ? q - self.position : self.position - q;
    if (dir.norm() < 1e-12) continue;
    const double dd = inside ? -d : d;
    walls.push_back({d, q, dir.normalized() * (p.A_wall * std::exp((p.radius - dd) / p.B_wall))});
  }
  out.terms.ped_wall = ordered_sum(walls);
  out.force = out.terms.ped_drive + out.terms.ped_social + out.terms.ped_wall;
  return out;
}

// ---------------------------------------------------------------------------
// Vehicles

double time_to_cover(double distance, double v, double accel, double v_max) {
  if (distance <= 0.0) return 0.0;
  v = std::max(v, 0.0);
  if (v >= v_max || accel <= 0.0) return v > 1e-9 ? distance / v : kUnconstrained;
  const double t1 = (v_max - v) / accel;
  const double d1 = 0.5 * (v + v_max) * t1;
  if (distance <= d1) return (-v + std::sqrt(v * v + 2.0 * accel * distance)) / accel;
  return t1 + (distance - d1) / v_max;
}

namespace {

Footprint agent_footprint(const World& world, const Agent& a) {
  if (a.kind == AgentKind::pedestrian) return Footprint::disc(a.state.position, pedestrian_params_of(world, a).radius);
  return Footprint::rectangle(a.state.position, a.state.heading, a.length, a.width);
}

double half_length_of(const World& world, const Agent& a) {
  return a.kind == AgentKind::pedestrian ? pedestrian_params_of(world, a).radius : 0.5 * a.length;
}

struct StopConstraint {
  double distance;  // from the front bumper
  double target_speed;
};

}  // namespace

namespace {

// Whether agent `o` has committed to its side of the conflict between `its_lane` and `my_lane`.
bool committed_against(const Agent& o, const std::string& its_lane, const std::string& my_lane) {
  const auto& ys = o.route.yields();
  for (std::size_t k = 0; k < ys.size() && k < o.committed.size(); ++k) {
    if (o.committed[k] && ys[k].own_lane == its_lane && ys[k].other_lane == my_lane) return true;
  }
  return false;
}

}  // namespace

std::optional<double> priority_stop_distance(const World& world, std::size_t index, std::vector<bool>& commit) {
  if (!world.terms.priority) return std::nullopt;
  const Agent& me = world.agents[index];
  const auto& p = vehicle_params_of(world, me);
  const auto& yields = me.route.yields();
  if (commit.size() != yields.size()) commit.assign(yields.size(), false);
  const double s = me.state.s;
  const double v = me.state.speed;
  const double half = half_length_of(world, me);
  const double front = s + half;
  const double rear = s - half;
  const double v_des = std::min(p.v0, me.route.speed_limit_at(s));
  std::optional<double> best;
  auto constrain = [&](double d) { best = best ? std::min(*best, d) : d; };

  for (std::size_t k = 0; k < yields.size(); ++k) {
    const YieldPoint& y = yields[k];
    if (rear > y.zone_out) continue;
    const bool inside = front >= y.zone_in;
    if (y.must_yield && !commit[k] && front > y.stop_s + 0.5) commit[k] = true;
    // claimed: somebody is in the shared stretch or can no longer keep out of it.
    bool claimed = false, conflict = false;
    for (std::size_t j = 0; j < world.agents.size(); ++j) {
      if (j == index) continue;
      const Agent& o = world.agents[j];
      if (!o.active || o.finished) continue;
      const auto off = o.route.lane_offset(y.other_lane);
      if (!off) continue;
      const double hj = half_length_of(world, o);
      const double in_j = *off + y.other_in;
      const double out_j = *off + y.other_out;
      const double front_j = o.state.s + hj;
      const double rear_j = o.state.s - hj;
      const double v_j = o.state.speed;
      if (rear_j > out_j) {
        // Gone, but its occupancy stays padded by T_gap.
        if (!y.must_yield || commit[k] || v_j < 0.1) continue;
        const double since = (rear_j - out_j) / v_j;
        const double own_in = time_to_cover(y.zone_in - front, v, p.a_max, v_des);
        if (own_in < p.T_gap - since) conflict = true;
        continue;
      }
      const double gap_j = in_j - front_j;
      const bool j_inside = gap_j <= 0.0;
      bool j_claims = j_inside || committed_against(o, y.other_lane, y.own_lane);
      if (!j_claims && v_j > 0.3) {
        const double brake = o.kind == AgentKind::pedestrian ? 2.0 : vehicle_params_of(world, o).b_max;
        j_claims = v_j * v_j / (2.0 * brake) >= gap_j - 0.5;
      }
      if (j_claims) claimed = true;
      if (!y.must_yield || commit[k]) continue;
      double t_in = 0.0, t_out = 0.0;
      if (j_inside) {
        t_out = (out_j - rear_j) / std::max(v_j, 0.1);
      } else {
        if (v_j < 0.3 && !j_claims) continue;
        t_in = gap_j / std::max(v_j, 0.1);
        t_out = (out_j - rear_j) / std::max(v_j, 0.1);
      }
      const double own_in = time_to_cover(y.zone_in - front, v, p.a_max, v_des);
      const double own_out = time_to_cover(y.zone_out - rear, v, p.a_max, v_des);
      if (own_in < t_out + p.T_gap && t_in - p.T_gap < own_out) conflict = true;
    }
    if (claimed && !inside) {
      const double line = front <= y.stop_s - 0.1 ? std::min(y.stop_s, y.zone_in) : y.zone_in;
      constrain(line - 0.3 - front);
    }
    if (!y.must_yield || commit[k] || !conflict) continue;
    const double d_stop = y.stop_s - 0.3 - front;
    if (v * v / (2.0 * p.b_max) > d_stop + 0.5) {
      commit[k] = true;  // cannot stop before the line any more
      continue;
    }
    constrain(d_stop);
  }
  return best;
}

double priority_yield(const World& world, std::size_t index, std::vector<bool>& commit) {
  const auto d = priority_stop_distance(world, index, commit);
  if (!d) return kUnconstrained;
  const auto& p = vehicle_params_of(world, world.agents[index]);
  return std::sqrt(2.0 * p.b_comf * std::max(*d, 0.0));
}

VehicleDemand vehicle_force(const World& world, std::size_t index, std::vector<bool>& commit) {
  const Agent& me = world.agents[index];
  const auto& p = vehicle_params_of(world, me);
  const Route& route = me.route;
  const Polyline& path = route.path();
  const double s = me.state.s;
  const double v = me.state.speed;
  const double front = s + 0.5 * me.length;
  VehicleDemand out;
  auto& t = out.terms;
  if (path.size() < 2) throw DataError("agent " + std::to_string(me.id) + " has no route");
  const auto own = path.project(me.state.position, std::max(0.0, s - 2.0), s + 2.0);
  if (own.distance > route.width_at(s) * 2.0 + 2.0) {
    throw DataError("agent " + std::to_string(me.id) + " is off its route (" + std::to_string(own.distance) + " m)");
  }

  t.v_desired = std::min(p.v0, route.speed_limit_at(s));
  std::vector<StopConstraint> stops;

  // Curve speed: braking profile toward sqrt(a_lat / kappa) over the preview window.
  if (world.terms.curve) {
    const double preview = v * v / (2.0 * p.b_comf) + std::max(5.0, v) + 5.0;
    for (double d = 0.0; d <= preview && s + d <= route.length(); d += 1.0) {
      // The curvature estimate spans +-2 m, so read it that far ahead to reach vc at the arc start.
      const double kappa = std::abs(route.curvature_at(s + d + 2.0));
      if (kappa < 1e-4) continue;
      const double vc = std::sqrt(p.a_lat / kappa);
      t.v_curve = std::min(t.v_curve, std::sqrt(vc * vc + 2.0 * p.b_comf * d));
      if (d > 0.5) stops.push_back({d, vc});
    }
    const double tan_d = std::abs(std::tan(me.state.steering));
    if (tan_d > 1e-6) t.v_curve = std::min(t.v_curve, std::sqrt(p.a_lat * p.L / tan_d));
  }

  // Agents inside the corridor ahead.
  const double horizon = std::max(40.0, v * v / (2.0 * p.b_comf) + p.min_gap + p.headway * v + 20.0);
  struct Leader {
    double gap;
    double v_along;
    bool vru;
  };
  std::vector<Leader> leaders;
  double shift_right = 0.0;  // push toward negative lateral
  double shift_left = 0.0;
  const double own_lat = own.lateral;
  for (std::size_t j = 0; j < world.agents.size(); ++j) {
    if (j == index) continue;
    const Agent& o = world.agents[j];
    if (!o.active || o.finished) continue;
    if (distance(o.state.position, me.state.position) > horizon + 10.0) continue;
    const bool vru = is_vru(o.kind);
    std::vector<Vec2> pts;
    if (o.kind == AgentKind::pedestrian) {
      const double r = pedestrian_params_of(world, o).radius;
      pts = {o.state.position + Vec2{r, 0.0}, o.state.position + Vec2{-r, 0.0}, o.state.position + Vec2{0.0, r},
             o.state.position + Vec2{0.0, -r}};
    } else {
      pts = agent_footprint(world, o).outline();
    }
    const double lo = std::max(0.0, s - me.length);
    const double hi = s + horizon;
    double smin = kUnconstrained, lat_lo = kUnconstrained, lat_hi = -kUnconstrained;
    for (const auto& q : pts) {
      const auto pr = path.project(q, lo, hi);
      if (pr.s <= lo + 1e-6) continue;
      if (pr.s >= std::min(hi, path.length()) - 1e-6) continue;
      smin = std::min(smin, pr.s);
      lat_lo = std::min(lat_lo, pr.lateral);
      lat_hi = std::max(lat_hi, pr.lateral);
    }
    if (!std::isfinite(smin)) continue;
    const double gap = smin - front;
    if (gap < -0.5 * me.length) continue;
    const double half = 0.5 * me.width + (vru ? 0.5 : 0.4);
    const bool in_corridor = lat_hi > own_lat - half && lat_lo < own_lat + half;
    if (in_corridor) {
      const double v_along = o.state.velocity.dot(path.tangent_at(smin));
      leaders.push_back({std::max(gap, 0.0), v_along, vru});
    } else if (vru && world.terms.vru && gap < 15.0) {
      const double sep_left = lat_lo - (own_lat + 0.5 * me.width);
      const double sep_right = (own_lat - 0.5 * me.width) - lat_hi;
      if (sep_left >= 0.0 && sep_left < p.shy_away) shift_right = std::max(shift_right, p.shy_away - sep_left);
      if (sep_right >= 0.0 && sep_right < p.shy_away) shift_left = std::max(shift_left, p.shy_away - sep_right);
    }
  }
  std::sort(leaders.begin(), leaders.end(), [](const Leader& a, const Leader& b) {
    if (a.gap != b.gap) return a.gap < b.gap;
    return a.v_along < b.v_along;
  });
  // Keep crosswalks clear when the queue ahead leaves no room behind it.
  if (!leaders.empty() && leaders.front().v_along < 1.0) {
    const double leader_at = front + leaders.front().gap;
    for (const auto& span : route.crosswalks()) {
      const double d = span.s_in - 1.0 - front;
      if (d < -0.5 || span.s_in > leader_at) continue;
      if (leader_at < span.s_out + me.length + p.min_gap) stops.push_back({d, 0.0});
    }
  }
  const double d_safe = p.min_gap + p.headway * v;
  for (const auto& l : leaders) {
    if (world.terms.repulsion) {
      const double rep = l.vru ? p.A_b * std::exp((d_safe - l.gap) / p.B_b) : p.A_v * std::exp((d_safe - l.gap) / p.B_v);
      (l.vru ? t.vru : t.leader) -= rep;
    }
    stops.push_back({l.gap - p.min_gap, std::max(0.0, l.v_along)});
  }

  // Vulnerable road users on or next to a crosswalk ahead.
  if (world.terms.vru && world.space) {
    for (const auto& span : route.crosswalks()) {
      if (front >= span.s_in || span.s_in - front > horizon) continue;
      const auto& poly = world.space->crosswalks[span.crosswalk];
      const Vec2 centre = polygon_centroid(poly);
      bool blocked = false;
      for (std::size_t j = 0; j < world.agents.size() && !blocked; ++j) {
        const Agent& o = world.agents[j];
        if (j == index || !o.active || o.finished || !is_vru(o.kind)) continue;
        const bool inside = point_in_polygon(o.state.position, poly);
        const double d = inside ? 0.0 : distance_to_polygon_boundary(o.state.position, poly);
        if (inside || (d <= 1.5 && o.state.velocity.dot(centre - o.state.position) > 0.0)) blocked = true;
      }
      if (blocked) stops.push_back({span.s_in - 1.0 - front, 0.0});
    }
  }

  // Priority rule.
  if (const auto d = priority_stop_distance(world, index, commit)) {
    t.v_yield = std::sqrt(2.0 * p.b_comf * std::max(*d, 0.0));
    stops.push_back({*d, 0.0});
  }

  double v_target = std::min({t.v_desired, t.v_curve, t.v_yield});
  double a_stop = kUnconstrained;
  for (const auto& c : stops) {
    const double allowed = std::sqrt(c.target_speed * c.target_speed + 2.0 * p.b_comf * std::max(c.distance, 0.0));
    v_target = std::min(v_target, allowed);
    if (v >= allowed && v > c.target_speed) {
      const double a = c.distance > 0.05 ? (c.target_speed * c.target_speed - v * v) / (2.0 * c.distance) : -p.b_max;
      a_stop = std::min(a_stop, a);
    }
  }
  t.drive = (v_target - v) / p.tau;
  double accel = t.drive + t.leader + t.vru;
  if (a_stop < accel) {
    t.stop = a_stop;
    accel = a_stop;
  }
  out.accel = std::clamp(accel, -p.b_max, p.a_max);

  double lateral = world.terms.lateral ? me.state.preferred_offset + shift_left - shift_right : 0.0;
  const double cap = std::max(0.0, 0.5 * (route.width_at(s) - me.width) - 0.15);
  out.lateral = std::clamp(lateral, -cap, cap);
  t.lateral_target = out.lateral;
  return out;
}

double pure_pursuit(const AgentState& state, const Route& route, double lateral, const VehicleParams& p) {
  const Polyline& path = route.path();
  const double lookahead = std::max(5.0, state.speed * 1.0);
  const double st = state.s + lookahead;
  const Vec2 tangent = path.tangent_at(std::min(st, path.length()));
  const Vec2 target = path.extrapolate(st) + tangent.left() * lateral;
  const Vec2 to = target - state.position;
  const double dist = to.norm();
  if (dist < 1e-9) return 0.0;
  const double alpha = wrap_angle(std::atan2(to.y, to.x) - state.heading);
  const double delta = std::atan(2.0 * p.L * std::sin(alpha) / dist);
  return std::clamp(delta, -p.delta_max, p.delta_max);
}

}  // namespace junction
