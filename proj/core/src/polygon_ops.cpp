#include <boost/geometry.hpp>
#include <boost/geometry/geometries/linestring.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

#include "junction/geometry.hpp"

namespace bg = boost::geometry;

namespace junction {
namespace {

using BPoint = bg::model::d2::point_xy<double>;
using BPolygon = bg::model::polygon<BPoint>;
using BMulti = bg::model::multi_polygon<BPolygon>;
using BLine = bg::model::linestring<BPoint>;

BPolygon to_boost(std::span<const Vec2> poly) {
  BPolygon out;
  for (const auto& p : poly) bg::append(out.outer(), BPoint(p.x, p.y));
  if (!poly.empty()) bg::append(out.outer(), BPoint(poly.front().x, poly.front().y));
  bg::correct(out);
  return out;
}

// Outer rings only; holes from self-intersecting paths are filled.
std::vector<Polygon> from_boost(const BMulti& multi) {
  std::vector<Polygon> out;
  for (const auto& poly : multi) {
    Polygon ring;
    const auto& outer = poly.outer();
    for (std::size_t i = 0; i + 1 < outer.size(); ++i) {
      ring.push_back({bg::get<0>(outer[i]), bg::get<1>(outer[i])});
    }
    if (ring.size() >= 3) {
      if (polygon_area(ring) < 0.0) std::reverse(ring.begin(), ring.end());
      out.push_back(std::move(ring));
    }
  }
  return out;
}

BMulti union_all(std::span<const Polygon> polys) {
  BMulti acc;
  for (const auto& p : polys) {
    BMulti next;
    bg::union_(acc, to_boost(p), next);
    acc = std::move(next);
  }
  return acc;
}

}  // namespace

std::vector<Polygon> buffer_polyline(const Polyline& path, double half_width) {
  if (path.size() < 2 || path.length() <= 0.0) {
    throw DataError("buffer_polyline: degenerate path");
  }
  BLine line;
  for (const auto& p : path.points()) bg::append(line, BPoint(p.x, p.y));
  BMulti result;
  bg::strategy::buffer::distance_symmetric<double> dist(half_width);
  bg::strategy::buffer::side_straight side;
  bg::strategy::buffer::join_round join(12);
  bg::strategy::buffer::end_flat end;
  bg::strategy::buffer::point_circle circle(12);
  bg::buffer(line, result, dist, side, join, end, circle);
  return from_boost(result);
}

std::vector<Polygon> intersect_polygons(std::span<const Polygon> a, std::span<const Polygon> b) {
  const BMulti ua = union_all(a);
  const BMulti ub = union_all(b);
  BMulti out;
  bg::intersection(ua, ub, out);
  std::vector<Polygon> polys = from_boost(out);
  std::erase_if(polys, [](const Polygon& p) { return std::abs(polygon_area(p)) < 1e-6; });
  return polys;
}

bool footprint_intersects_polygon(const Footprint& f, std::span<const Vec2> poly) {
  if (f.shape == Footprint::Shape::disc) {
    return point_in_polygon(f.center, poly) || distance_to_polygon_boundary(f.center, poly) <= f.radius;
  }
  return bg::intersects(to_boost(f.outline()), to_boost(poly));
}

}  // namespace junction
