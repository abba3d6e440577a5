#include <cctype>
#include "junction/geometry.hpp"

#include <algorithm>
#include <array>
#include <limits>

namespace junction {

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::car: return "car";
    case AgentKind::truck: return "truck";
    case AgentKind::bus: return "bus";
    case AgentKind::pedestrian: return "pedestrian";
    case AgentKind::bicycle: return "bicycle";
  }
  return "car";
}

std::optional<AgentKind> parse_agent_kind(std::string_view raw) {
  std::string text(raw);
  for (char& c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (text == "car" || text == "van") return AgentKind::car;
  if (text == "truck" || text == "truck_bus") return AgentKind::truck;
  if (text == "bus") return AgentKind::bus;
  if (text == "pedestrian" || text == "ped") return AgentKind::pedestrian;
  if (text == "bicycle" || text == "bike" || text == "cyclist") return AgentKind::bicycle;
  return std::nullopt;
}

double polygon_area(std::span<const Vec2> poly) {
  double a = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    a += poly[i].cross(poly[(i + 1) % n]);
  }
  return 0.5 * a;
}

Vec2 polygon_centroid(std::span<const Vec2> poly) {
  const double area = polygon_area(poly);
  if (std::abs(area) < 1e-12) {
    Vec2 mean;
    for (const auto& p : poly) mean += p;
    return poly.empty() ? mean : mean / static_cast<double>(poly.size());
  }
  Vec2 c;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Vec2 p = poly[i];
    const Vec2 q = poly[(i + 1) % n];
    const double w = p.cross(q);
    c += (p + q) * w;
  }
  return c / (6.0 * area);
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> poly) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squared_norm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + ab * t);
}

double distance_to_polygon_boundary(Vec2 p, std::span<const Vec2> poly) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    best = std::min(best, distance_to_segment(p, poly[i], poly[(i + 1) % n]));
  }
  return best;
}

Polyline::Polyline(std::vector<Vec2> points) {
  points_.reserve(points.size());
  for (const auto& p : points) {
    if (points_.empty() || distance(points_.back(), p) > 1e-9) points_.push_back(p);
  }
  cumulative_.resize(points_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (i > 0) acc += distance(points_[i - 1], points_[i]);
    cumulative_[i] = acc;
  }
}

std::size_t Polyline::segment_index(double s) const {
  if (points_.size() < 2) return 0;
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t idx = it == cumulative_.begin() ? 0 : static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  return std::min(idx, points_.size() - 2);
}

Vec2 Polyline::point_at(double s) const {
  if (points_.empty()) return {};
  if (points_.size() == 1) return points_.front();
  s = std::clamp(s, 0.0, length());
  const std::size_t i = segment_index(s);
  const double seg = cumulative_[i + 1] - cumulative_[i];
  const double t = seg > 0.0 ? (s - cumulative_[i]) / seg : 0.0;
  return points_[i] + (points_[i + 1] - points_[i]) * t;
}

Vec2 Polyline::tangent_at(double s) const {
  if (points_.size() < 2) return {1.0, 0.0};
  s = std::clamp(s, 0.0, length());
  const std::size_t i = segment_index(s);
  return (points_[i + 1] - points_[i]).normalized();
}

double Polyline::heading_at(double s) const {
  const Vec2 t = tangent_at(s);
  return std::atan2(t.y, t.x);
}

Vec2 Polyline::extrapolate(double s) const {
  if (s < 0.0) return point_at(0.0) + tangent_at(0.0) * s;
  if (s > length()) return point_at(length()) + tangent_at(length()) * (s - length());
  return point_at(s);
}

double Polyline::curvature_at(double s, double h) const {
  if (points_.size() < 3) return 0.0;
  const double lo = std::max(0.0, s - h);
  const double hi = std::min(length(), s + h);
  if (hi - lo < 1e-6) return 0.0;
  const Vec2 a = point_at(lo);
  const Vec2 b = point_at(0.5 * (lo + hi));
  const Vec2 c = point_at(hi);
  const double ab = distance(a, b);
  const double bc = distance(b, c);
  const double ca = distance(c, a);
  const double denom = ab * bc * ca;
  if (denom < 1e-12) return 0.0;
  // Menger curvature: 4 * triangle area / product of sides, signed by turn direction.
  return 2.0 * (b - a).cross(c - a) / denom;
}

Polyline::Projection Polyline::project(Vec2 p) const {
  return project(p, 0.0, length());
}

Polyline::Projection Polyline::project(Vec2 p, double s_min, double s_max) const {
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  if (points_.empty()) return best;
  if (points_.size() == 1) {
    best.point = points_.front();
    best.distance = distance(p, best.point);
    return best;
  }
  s_min = std::clamp(s_min, 0.0, length());
  s_max = std::clamp(s_max, s_min, length());
  const std::size_t first = segment_index(s_min);
  const std::size_t last = segment_index(s_max);
  for (std::size_t i = first; i <= last; ++i) {
    const Vec2 a = points_[i];
    const Vec2 ab = points_[i + 1] - a;
    const double len2 = ab.squared_norm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    double s = cumulative_[i] + t * (cumulative_[i + 1] - cumulative_[i]);
    s = std::clamp(s, s_min, s_max);
    const Vec2 q = point_at(s);
    const double d = distance(p, q);
    if (d < best.distance) {
      best.distance = d;
      best.s = s;
      best.point = q;
    }
  }
  const Vec2 tan = tangent_at(best.s);
  best.lateral = tan.cross(p - best.point);
  return best;
}

Polyline Polyline::decimated(double min_spacing) const {
  if (points_.size() <= 2) return *this;
  std::vector<Vec2> out{points_.front()};
  for (std::size_t i = 1; i + 1 < points_.size(); ++i) {
    if (distance(out.back(), points_[i]) >= min_spacing) out.push_back(points_[i]);
  }
  if (out.size() > 1 && distance(out.back(), points_.back()) < 0.5 * min_spacing) out.pop_back();
  out.push_back(points_.back());
  return Polyline(std::move(out));
}

Footprint Footprint::rectangle(Vec2 c, double heading, double length, double width) {
  Footprint f;
  f.shape = Shape::rectangle;
  f.center = c;
  f.heading = heading;
  f.length = length;
  f.width = width;
  return f;
}

Footprint Footprint::disc(Vec2 c, double radius) {
  Footprint f;
  f.shape = Shape::disc;
  f.center = c;
  f.radius = radius;
  return f;
}

Polygon Footprint::outline() const {
  if (shape == Shape::rectangle) {
    const Vec2 fwd = Vec2::from_angle(heading) * (0.5 * length);
    const Vec2 side = Vec2::from_angle(heading).left() * (0.5 * width);
    return {center - fwd - side, center + fwd - side, center + fwd + side, center - fwd + side};
  }
  constexpr int n = 16;
  Polygon out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    out.push_back(center + Vec2::from_angle(2.0 * std::numbers::pi * i / n) * radius);
  }
  return out;
}

namespace {

// Separating axis test for two convex CCW polygons.
bool convex_overlap(const Polygon& a, const Polygon& b) {
  auto separated_on_axes_of = [](const Polygon& p, const Polygon& q) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Vec2 edge = p[(i + 1) % p.size()] - p[i];
      const Vec2 axis = edge.left();
      double pmin = std::numeric_limits<double>::infinity(), pmax = -pmin;
      double qmin = pmin, qmax = -pmin;
      for (const auto& v : p) {
        const double d = axis.dot(v);
        pmin = std::min(pmin, d);
        pmax = std::max(pmax, d);
      }
      for (const auto& v : q) {
        const double d = axis.dot(v);
        qmin = std::min(qmin, d);
        qmax = std::max(qmax, d);
      }
      if (pmax < qmin || qmax < pmin) return true;
    }
    return false;
  };
  return !separated_on_axes_of(a, b) && !separated_on_axes_of(b, a);
}

bool disc_rect_overlap(const Footprint& disc, const Footprint& rect) {
  const Polygon r = rect.outline();
  if (point_in_polygon(disc.center, r)) return true;
  return distance_to_polygon_boundary(disc.center, r) <= disc.radius;
}

}  // namespace

bool footprints_overlap(const Footprint& a, const Footprint& b) {
  using S = Footprint::Shape;
  if (a.shape == S::disc && b.shape == S::disc) {
    return distance(a.center, b.center) <= a.radius + b.radius;
  }
  if (a.shape == S::disc) return disc_rect_overlap(a, b);
  if (b.shape == S::disc) return disc_rect_overlap(b, a);
  return convex_overlap(a.outline(), b.outline());
}

}  // namespace junction
