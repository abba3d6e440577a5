#include <numbers>
#include <string>

#include "doctest.h"
#include "junction/synthetic.hpp"
#include "junction/traffic_space.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

using namespace junction;

namespace {

// Two straight roads crossing at the origin, N-S with priority.
std::string cross_map(const std::string& extra_ref = "", const std::string& ns_line = "[[0,-40],[0,40]]") {
  return R"({"id": "mini", "lanes": [
    {"id": "sn", "centerline": )" + ns_line + R"(, "width": 3.5, "speed_limit": 13.9, "priority_rank": 0, "successors": []},
    {"id": "we", "centerline": [[-40,0],[40,0]], "width": 3.5, "speed_limit": 13.9, "priority_rank": 1, "successors": [], "yield_s": 35}
  ], "crosswalks": [],
  "reference_points": [
    {"label": "N", "xy": [0,40], "kinds": ["car"]}, {"label": "S", "xy": [0,-40], "kinds": ["car"]},
    {"label": "E", "xy": [40,0], "kinds": ["car"]}, {"label": "W", "xy": [-40,0], "kinds": ["car"]})" +
         extra_ref + "]}";
}

std::string error_of(const std::string& json) {
  try {
    parse_traffic_space(json);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("traffic_space") {
  TEST_CASE("four-branch map parses with four vehicle reference points") {
    const TrafficSpace s = parse_traffic_space(cross_map());
    CHECK(s.id == "mini");
    CHECK(s.lanes.size() == 2);
    CHECK(s.reference_points_for(AgentKind::car).size() == 4);
    CHECK(s.reference_points_for(AgentKind::pedestrian).empty());
    REQUIRE(s.lane("we") != nullptr);
    CHECK(s.lane("we")->yield_s == 35.0);
  }

  TEST_CASE("schema violations name the field") {
    CHECK(error_of(cross_map("", "[[0,-40]]")).find("centerline") != std::string::npos);
    CHECK(error_of(cross_map(R"(, {"label": "N", "xy": [1,40], "kinds": ["car"]})")).find("duplicate label") !=
          std::string::npos);
    CHECK(error_of(R"({"id": "x", "lanes": 3})").find("$.lanes") != std::string::npos);
    CHECK(error_of("{not json").find("invalid JSON") != std::string::npos);
    CHECK(error_of(cross_map(R"(, {"label": "Q", "xy": [1,40], "kinds": ["car"]})")).find("compass") !=
          std::string::npos);
  }

  TEST_CASE("same label for disjoint kind sets is allowed") {
    const TrafficSpace s = parse_traffic_space(cross_map(R"(, {"label": "N", "xy": [5,40], "kinds": ["pedestrian"]})"));
    CHECK(s.reference_points_for(AgentKind::pedestrian).size() == 1);
  }

  TEST_CASE("crossing conflict with a shared stretch around the crossing point") {
    const TrafficSpace s = parse_traffic_space(cross_map());
    REQUIRE(s.conflicts().size() == 1);
    const auto& c = s.conflicts()[0];
    CHECK(c.type == LaneConflict::Type::crossing);
    CHECK(c.point.x == doctest::Approx(0.0));
    CHECK(c.point.y == doctest::Approx(0.0));
    const double sa = c.lane_a == "sn" ? c.s_a : c.s_b;
    CHECK(sa == doctest::Approx(40.0));
    // Half the summed widths plus 0.5 m on either side of the crossing.
    CHECK(c.a_in == doctest::Approx(c.s_a - 4.0).epsilon(0.02));
    CHECK(c.a_out == doctest::Approx(c.s_a + 4.0).epsilon(0.02));
    CHECK(s.yields_to("we", "sn"));
    CHECK_FALSE(s.yields_to("sn", "we"));
  }

  TEST_CASE("file loading and missing files") {
    ScratchDir dir("map");
    const auto p = dir.write("map.json", cross_map());
    CHECK(load_traffic_space(p).lanes.size() == 2);
    CHECK_THROWS_AS(load_traffic_space(dir / "absent.json"), ConfigError);
  }

  TEST_CASE("JSON round trip") {
    const TrafficSpace a = make_intersection();
    const TrafficSpace b = parse_traffic_space(traffic_space_to_json(a));
    REQUIRE(a.lanes.size() == b.lanes.size());
    for (std::size_t i = 0; i < a.lanes.size(); ++i) {
      CHECK(a.lanes[i].id == b.lanes[i].id);
      CHECK(a.lanes[i].centerline.points() == b.lanes[i].centerline.points());
      CHECK(a.lanes[i].successors == b.lanes[i].successors);
      CHECK(a.lanes[i].yield_s == b.lanes[i].yield_s);
      CHECK(a.lanes[i].kinds == b.lanes[i].kinds);
    }
    CHECK(a.conflicts().size() == b.conflicts().size());
    CHECK(traffic_space_to_json(a) == traffic_space_to_json(b));
  }

  TEST_CASE("routes on the synthetic intersection") {
    const TrafficSpace s = make_intersection();
    const auto sn = s.route_lanes("S", "N", AgentKind::car);
    REQUIRE(sn.size() == 3);
    CHECK(sn[1] == "c_S_N");
    CHECK(s.route_lanes("S", "S", AgentKind::car).empty());
    CHECK_FALSE(s.route_lanes("NE", "NW", AgentKind::pedestrian).empty());
    CHECK(s.yields_to("c_E_W", "c_S_N"));
    CHECK(s.yields_to("c_W_E", "c_N_S"));
  }

  TEST_CASE("nearest reference resolves ties to the smaller label") {
    const TrafficSpace s = parse_traffic_space(cross_map());
    const auto n = s.nearest_reference({20, 20}, AgentKind::car);
    REQUIRE(n);
    CHECK(n->first->label == "E");
    CHECK(n->second == doctest::Approx(std::hypot(20.0, 20.0)));
  }

  TEST_CASE("compass labels") {
    CHECK(is_compass_label("NW"));
    CHECK_FALSE(is_compass_label("X"));
    CHECK(compass_angle("E") == doctest::Approx(0.0));
    CHECK(compass_angle("N") == doctest::Approx(std::numbers::pi / 2));
    CHECK(compass_angle("SW") == doctest::Approx(-3 * std::numbers::pi / 4).epsilon(1e-12));
  }
}
