#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "junction/geometry.hpp"
#include "oracles.hpp"

using namespace junction;

TEST_SUITE("geometry") {
  TEST_CASE("wrap_angle maps into (-pi, pi]") {
    CHECK(wrap_angle(std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(wrap_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(wrap_angle(3 * std::numbers::pi / 2) == doctest::Approx(-std::numbers::pi / 2));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int i = 0; i < 1000; ++i) {
      const double a = u(rng);
      const double w = wrap_angle(a);
      CHECK(w > -std::numbers::pi);
      CHECK(w <= std::numbers::pi);
      CHECK(std::sin(w) == doctest::Approx(std::sin(a)).epsilon(1e-9));
      CHECK(std::cos(w) == doctest::Approx(std::cos(a)).epsilon(1e-9));
    }
  }

  TEST_CASE("polygon area, centroid and containment") {
    const Polygon sq{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
    CHECK(polygon_area(sq) == doctest::Approx(4.0));
    const Polygon cw{{0, 0}, {0, 2}, {2, 2}, {2, 0}};
    CHECK(polygon_area(cw) == doctest::Approx(-4.0));
    const Vec2 c = polygon_centroid(sq);
    CHECK(c.x == doctest::Approx(1.0));
    CHECK(c.y == doctest::Approx(1.0));
    CHECK(point_in_polygon({1, 1}, sq));
    CHECK_FALSE(point_in_polygon({3, 1}, sq));
    CHECK(distance_to_polygon_boundary({1, 1}, sq) == doctest::Approx(1.0));
    CHECK(distance_to_segment({0, 1}, {-1, 0}, {1, 0}) == doctest::Approx(1.0));
    CHECK(distance_to_segment({3, 0}, {-1, 0}, {1, 0}) == doctest::Approx(2.0));
  }

  TEST_CASE("point_in_polygon agrees with the crossing-number oracle") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3, 3);
    const Polygon star{{0, 2}, {0.5, 0.5}, {2, 0}, {0.5, -0.5}, {0, -2}, {-0.5, -0.5}, {-2, 0}, {-0.5, 0.5}};
    for (int i = 0; i < 2000; ++i) {
      const Vec2 p{u(rng), u(rng)};
      if (distance_to_polygon_boundary(p, star) < 1e-6) continue;
      CHECK(point_in_polygon(p, star) == oracle::inside(p, star));
    }
  }

  TEST_CASE("polyline arc length, interpolation and projection") {
    const Polyline pl({{0, 0}, {10, 0}, {10, 10}});
    CHECK(pl.length() == doctest::Approx(20.0));
    CHECK(pl.point_at(15).x == doctest::Approx(10.0));
    CHECK(pl.point_at(15).y == doctest::Approx(5.0));
    CHECK(pl.point_at(-5) == pl.point_at(0));
    CHECK(pl.point_at(99) == pl.point_at(20));
    CHECK(pl.heading_at(5) == doctest::Approx(0.0));
    CHECK(pl.heading_at(15) == doctest::Approx(std::numbers::pi / 2));
    CHECK(pl.extrapolate(-2).x == doctest::Approx(-2.0));
    CHECK(pl.extrapolate(22).y == doctest::Approx(12.0));

    const auto pr = pl.project({4, 1});
    CHECK(pr.s == doctest::Approx(4.0));
    CHECK(pr.lateral == doctest::Approx(1.0));
    CHECK(pr.distance == doctest::Approx(1.0));
    const auto right = pl.project({4, -2});
    CHECK(right.lateral == doctest::Approx(-2.0));
  }

  TEST_CASE("duplicate vertices are dropped") {
    const Polyline pl({{0, 0}, {0, 0}, {1, 0}, {1, 0}, {2, 0}});
    CHECK(pl.size() == 3);
    CHECK(pl.length() == doctest::Approx(2.0));
  }

  TEST_CASE("curvature of a sampled circle") {
    std::vector<Vec2> pts;
    const double R = 20.0;
    for (int k = 0; k <= 180; ++k) {
      const double a = k * std::numbers::pi / 180.0;
      pts.push_back({R * std::cos(a), R * std::sin(a)});
    }
    const Polyline pl(std::move(pts));
    CHECK(pl.curvature_at(pl.length() / 2) == doctest::Approx(1.0 / R).epsilon(1e-3));
    const Polyline line({{0, 0}, {10, 0}, {20, 0}});
    CHECK(line.curvature_at(10) == doctest::Approx(0.0));
  }

  TEST_CASE("decimation keeps the ends and the spacing") {
    std::vector<Vec2> pts;
    for (int i = 0; i <= 100; ++i) pts.push_back({0.1 * i, 0});
    const Polyline d = Polyline(pts).decimated(1.0);
    CHECK(d.points().front() == pts.front());
    CHECK(d.points().back() == pts.back());
    for (std::size_t i = 1; i + 1 < d.size(); ++i) {
      CHECK(distance(d.points()[i], d.points()[i - 1]) >= 1.0 - 1e-9);
    }
  }

  TEST_CASE("footprint overlap matches the polygon oracle") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-4, 4), h(-3.1, 3.1);
    int hits = 0;
    for (int i = 0; i < 1000; ++i) {
      const Footprint a = Footprint::rectangle({u(rng), u(rng)}, h(rng), 4.5, 1.8);
      const Footprint b = Footprint::rectangle({u(rng), u(rng)}, h(rng), 1.8, 0.6);
      const bool expect = oracle::polygons_overlap(oracle::rectangle(a.center, a.heading, 4.5, 1.8),
                                                   oracle::rectangle(b.center, b.heading, 1.8, 0.6));
      CHECK(footprints_overlap(a, b) == expect);
      hits += expect;
    }
    CHECK(hits > 50);
  }

  TEST_CASE("disc footprint against a polygon") {
    const Polygon sq{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
    CHECK(footprint_intersects_polygon(Footprint::disc({-0.2, 1}, 0.3), sq));
    CHECK_FALSE(footprint_intersects_polygon(Footprint::disc({-0.4, 1}, 0.3), sq));
    CHECK(footprint_intersects_polygon(Footprint::disc({1, 1}, 0.1), sq));
  }

  TEST_CASE("buffer and intersection of perpendicular paths") {
    const Polyline a({{-10, 0}, {10, 0}});
    const Polyline b({{0, -10}, {0, 10}});
    const auto ba = buffer_polyline(a, 1.0);
    const auto bb = buffer_polyline(b, 1.0);
    REQUIRE(ba.size() == 1);
    CHECK(std::abs(polygon_area(ba[0])) == doctest::Approx(40.0).epsilon(1e-3));
    const auto x = intersect_polygons(ba, bb);
    REQUIRE(x.size() == 1);
    CHECK(std::abs(polygon_area(x[0])) == doctest::Approx(4.0).epsilon(1e-6));
  }
}
