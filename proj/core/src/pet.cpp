#include <algorithm>
#include <cmath>

#include "junction/extraction.hpp"

namespace junction {

Pose pose_at_time(const Track& track, double t, double frame_rate) {
  const auto& s = track.samples;
  if (s.empty()) return {};
  const double f = t * frame_rate - static_cast<double>(track.initial_frame);
  if (f <= 0.0) return {s.front().position, s.front().heading};
  const double last = static_cast<double>(s.size() - 1);
  if (f >= last) return {s.back().position, s.back().heading};
  const auto i = static_cast<std::size_t>(std::floor(f));
  const double frac = f - static_cast<double>(i);
  const auto& a = s[i];
  const auto& b = s[i + 1];
  return {a.position + (b.position - a.position) * frac, wrap_angle(a.heading + wrap_angle(b.heading - a.heading) * frac)};
}

Footprint footprint_of(const Track& track, const Pose& pose, const FootprintConfig& cfg) {
  if (track.kind == AgentKind::pedestrian) return Footprint::disc(pose.position, cfg.pedestrian_radius);
  double len = track.length;
  double wid = track.width;
  if (len <= 0.0 || wid <= 0.0) {
    const bool bike = track.kind == AgentKind::bicycle;
    len = bike ? cfg.default_bicycle_length : cfg.default_vehicle_length;
    wid = bike ? cfg.default_bicycle_width : cfg.default_vehicle_width;
  }
  return Footprint::rectangle(pose.position, pose.heading, len, wid);
}

double path_half_width(const Track& track, const FootprintConfig& cfg) {
  if (track.kind == AgentKind::pedestrian) return cfg.pedestrian_radius;
  if (track.width > 0.0) return 0.5 * track.width;
  return 0.5 * (track.kind == AgentKind::bicycle ? cfg.default_bicycle_width : cfg.default_vehicle_width);
}

Polyline path_of(const Track& track, double min_spacing) {
  std::vector<Vec2> pts;
  pts.reserve(track.samples.size());
  for (const auto& s : track.samples) pts.push_back(s.position);
  return Polyline(std::move(pts)).decimated(min_spacing);
}

std::vector<ConflictArea> find_conflict_areas(const Polyline& path_a, double half_width_a, const Polyline& path_b,
                                              double half_width_b) {
  if (path_a.size() < 2 || path_a.length() <= 0.0 || path_b.size() < 2 || path_b.length() <= 0.0) {
    throw DataError("find_conflict_area: degenerate (zero-length) path");
  }
  const auto buf_a = buffer_polyline(path_a, half_width_a);
  const auto buf_b = buffer_polyline(path_b, half_width_b);
  auto polys = intersect_polygons(buf_a, buf_b);
  std::sort(polys.begin(), polys.end(), [](const Polygon& x, const Polygon& y) {
    return std::abs(polygon_area(x)) > std::abs(polygon_area(y));
  });
  std::vector<ConflictArea> out;
  for (auto& p : polys) {
    const Vec2 c = polygon_centroid(p);
    out.push_back({std::move(p), path_a.project(c).s, path_b.project(c).s});
  }
  return out;
}

std::optional<ConflictArea> find_conflict_area(const Polyline& path_a, double half_width_a, const Polyline& path_b,
                                               double half_width_b) {
  auto areas = find_conflict_areas(path_a, half_width_a, path_b, half_width_b);
  if (areas.empty()) return std::nullopt;
  return std::move(areas.front());
}

std::vector<ConflictArea> slice_along(const ConflictArea& area, const Polyline& path_a, const Polyline& path_b,
                                      double max_extent) {
  double s_lo = std::numeric_limits<double>::infinity();
  double s_hi = -s_lo;
  for (const auto& v : area.polygon) {
    const double s = path_a.project(v).s;
    s_lo = std::min(s_lo, s);
    s_hi = std::max(s_hi, s);
  }
  if (!(s_hi - s_lo > max_extent) || path_a.size() < 2) return {area};
  const int n = static_cast<int>(std::ceil((s_hi - s_lo) / max_extent));
  const double step = (s_hi - s_lo) / n;
  std::vector<ConflictArea> out;
  const std::vector<Polygon> whole{area.polygon};
  for (int k = 0; k < n; ++k) {
    const double a = s_lo + k * step;
    const double b = (k + 1 == n) ? s_hi : a + step;
    std::vector<Vec2> pts{path_a.extrapolate(a)};
    for (std::size_t i = 0; i < path_a.size(); ++i) {
      const double s = path_a.arc_length_at_vertex(i);
      if (s > a && s < b) pts.push_back(path_a.points()[i]);
    }
    pts.push_back(path_a.extrapolate(b));
    Polyline sub(std::move(pts));
    if (sub.size() < 2) continue;
    const auto strip = buffer_polyline(sub, 50.0);
    for (auto& p : intersect_polygons(whole, strip)) {
      const Vec2 c = polygon_centroid(p);
      out.push_back({std::move(p), path_a.project(c).s, path_b.project(c).s});
    }
  }
  if (out.empty()) return {area};
  return out;
}

namespace {

struct PolygonBounds {
  Vec2 center;
  double radius = 0.0;
};

PolygonBounds bounds_of(std::span<const Vec2> poly) {
  PolygonBounds b;
  for (const auto& v : poly) b.center += v;
  b.center = b.center / static_cast<double>(poly.size());
  for (const auto& v : poly) b.radius = std::max(b.radius, distance(v, b.center));
  return b;
}

bool occupied(const Footprint& f, std::span<const Vec2> poly, const PolygonBounds& b) {
  const double reach = f.shape == Footprint::Shape::disc ? f.radius : 0.5 * std::hypot(f.length, f.width);
  if (distance(f.center, b.center) > b.radius + reach) return false;
  return footprint_intersects_polygon(f, poly);
}

}  // namespace

std::optional<Occupancy> occupancy(const Track& track, std::span<const Vec2> polygon, double frame_rate,
                                   const FootprintConfig& cfg) {
  const auto& s = track.samples;
  if (s.empty() || polygon.size() < 3) return std::nullopt;
  const PolygonBounds bounds = bounds_of(polygon);
  auto occ_at_sample = [&](std::size_t i) {
    return occupied(footprint_of(track, {s[i].position, s[i].heading}, cfg), polygon, bounds);
  };
  auto occ_at_time = [&](double t) {
    return occupied(footprint_of(track, pose_at_time(track, t, frame_rate), cfg), polygon, bounds);
  };
  std::optional<std::size_t> first, last;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (occ_at_sample(i)) {
      if (!first) first = i;
      last = i;
    }
  }
  if (!first) return std::nullopt;
  auto time_of = [&](std::size_t i) { return static_cast<double>(s[i].frame) / frame_rate; };
  Occupancy o;
  o.first_frame = s[*first].frame;
  o.last_frame = s[*last].frame;
  o.enter_time = time_of(*first);
  o.exit_time = time_of(*last);
  constexpr int kIterations = 40;
  if (*first > 0) {
    double lo = time_of(*first - 1), hi = time_of(*first);
    for (int k = 0; k < kIterations; ++k) {
      const double mid = 0.5 * (lo + hi);
      (occ_at_time(mid) ? hi : lo) = mid;
    }
    o.enter_time = hi;
  }
  if (*last + 1 < s.size()) {
    double lo = time_of(*last), hi = time_of(*last + 1);
    for (int k = 0; k < kIterations; ++k) {
      const double mid = 0.5 * (lo + hi);
      (occ_at_time(mid) ? lo : hi) = mid;
    }
    o.exit_time = lo;
  }
  return o;
}

long long PETResult::last_occupancy_frame() const {
  long long f = std::numeric_limits<long long>::min();
  if (a_occupancy) f = std::max(f, a_occupancy->last_frame);
  if (b_occupancy) f = std::max(f, b_occupancy->last_frame);
  return f;
}

PETResult compute_pet(const Track& a, const Track& b, const ConflictArea& area, double frame_rate,
                      const FootprintConfig& cfg) {
  PETResult r;
  r.a_occupancy = occupancy(a, area.polygon, frame_rate, cfg);
  r.b_occupancy = occupancy(b, area.polygon, frame_rate, cfg);
  if (!r.a_occupancy || !r.b_occupancy) {
    const int missing = !r.a_occupancy ? a.track_id : b.track_id;
    r.reason = "track " + std::to_string(missing) + " never occupies the conflict area";
    return r;
  }
  const auto& oa = *r.a_occupancy;
  const auto& ob = *r.b_occupancy;
  if (oa.exit_time <= ob.enter_time) {
    r.first_agent = a.track_id;
    r.exit_time = oa.exit_time;
    r.entry_time = ob.enter_time;
    r.pet = r.entry_time - r.exit_time;
  } else if (ob.exit_time <= oa.enter_time) {
    r.first_agent = b.track_id;
    r.exit_time = ob.exit_time;
    r.entry_time = oa.enter_time;
    r.pet = r.entry_time - r.exit_time;
  } else {
    r.collision = true;
    r.first_agent = oa.enter_time <= ob.enter_time ? a.track_id : b.track_id;
    r.entry_time = r.exit_time = std::max(oa.enter_time, ob.enter_time);
    r.pet = 0.0;
  }
  return r;
}

PETResult compute_min_pet(const Track& a, const Track& b, std::span<const ConflictArea> areas, double frame_rate,
                          const FootprintConfig& cfg) {
  std::optional<PETResult> best;
  std::optional<PETResult> first_absent;
  for (const auto& area : areas) {
    auto r = compute_pet(a, b, area, frame_rate, cfg);
    if (!r.pet) {
      if (!first_absent) first_absent = std::move(r);
      continue;
    }
    if (!best || *r.pet < *best->pet) best = std::move(r);
  }
  if (best) return *best;
  if (first_absent) return *first_absent;
  PETResult none;
  none.reason = "no conflict area";
  return none;
}

}  // namespace junction
