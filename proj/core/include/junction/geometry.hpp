#pragma once

#include <span>
#include <vector>

#include "junction/types.hpp"

namespace junction {

// Simple polygon as an open vertex ring (the closing edge back to front() is implicit).
using Polygon = std::vector<Vec2>;

double polygon_area(std::span<const Vec2> poly);  // signed, CCW positive
Vec2 polygon_centroid(std::span<const Vec2> poly);
bool point_in_polygon(Vec2 p, std::span<const Vec2> poly);
double distance_to_segment(Vec2 p, Vec2 a, Vec2 b);
double distance_to_polygon_boundary(Vec2 p, std::span<const Vec2> poly);

// Arc-length parametrized polyline. Consecutive duplicate vertices are dropped on construction.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Vec2> points);

  const std::vector<Vec2>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  double arc_length_at_vertex(std::size_t i) const { return cumulative_[i]; }

  // s is clamped to [0, length]; tangent is unit length.
  Vec2 point_at(double s) const;
  Vec2 tangent_at(double s) const;
  double heading_at(double s) const;
  // Point beyond either end, extrapolated along the end tangent.
  Vec2 extrapolate(double s) const;

  // Signed curvature from the circle through the points at s-h, s, s+h.
  double curvature_at(double s, double h = 2.0) const;

  struct Projection {
    double s = 0.0;
    double lateral = 0.0;  // positive to the left of the direction of travel
    double distance = 0.0;
    Vec2 point;
  };
  Projection project(Vec2 p) const;
  // Restricts the search to arc lengths in [s_min, s_max].
  Projection project(Vec2 p, double s_min, double s_max) const;

  // Vertices with spacing at least min_spacing; first and last vertex are always kept.
  Polyline decimated(double min_spacing) const;

 private:
  std::size_t segment_index(double s) const;

  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
};

// Agent footprint in the plane: an oriented rectangle or a disc.
struct Footprint {
  enum class Shape { rectangle, disc };
  Shape shape = Shape::rectangle;
  Vec2 center;
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;
  double radius = 0.0;

  static Footprint rectangle(Vec2 c, double heading, double length, double width);
  static Footprint disc(Vec2 c, double radius);

  // Corners CCW for rectangles; a 16-gon for discs.
  Polygon outline() const;
};

bool footprints_overlap(const Footprint& a, const Footprint& b);

// Polygon set operations; implemented on top of Boost.Geometry.
std::vector<Polygon> buffer_polyline(const Polyline& path, double half_width);
std::vector<Polygon> intersect_polygons(std::span<const Polygon> a, std::span<const Polygon> b);
bool footprint_intersects_polygon(const Footprint& f, std::span<const Vec2> poly);

}  // namespace junction
