#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "junction/geometry.hpp"

namespace junction {

struct Lane {
  std::string id;
  Polyline centerline;
  double width = 3.5;
  double speed_limit = 13.9;
  // Lower rank has priority over higher rank.
  int priority_rank = 0;
  std::vector<std::string> successors;
  // Arc length of the yield line on this lane, when it has one.
  std::optional<double> yield_s;
  std::set<AgentKind> kinds;
};

struct ReferencePoint {
  std::string label;  // N, NE, E, SE, S, SW, W, NW
  Vec2 position;
  std::set<AgentKind> kinds;
};

// Two lanes whose centerlines cross, or which merge into a common successor.
struct LaneConflict {
  enum class Type { crossing, merge };
  std::string lane_a;
  std::string lane_b;
  double s_a = 0.0;
  double s_b = 0.0;
  Vec2 point;
  Type type = Type::crossing;
  // Stretch of each lane whose centerline lies within half the summed lane widths (+0.5 m)
  // of the other lane: the area a vehicle on one lane shares with a vehicle on the other.
  double a_in = 0.0, a_out = 0.0;
  double b_in = 0.0, b_out = 0.0;
};

class TrafficSpace {
 public:
  std::string id;
  std::vector<Lane> lanes;
  std::vector<Polygon> crosswalks;
  std::vector<ReferencePoint> reference_points;

  // Validates invariants and computes lane conflicts. Throws ConfigError.
  void finalize();

  const Lane* lane(const std::string& lane_id) const;
  const Lane& lane_or_throw(const std::string& lane_id) const;
  const std::vector<LaneConflict>& conflicts() const { return conflicts_; }
  std::vector<const ReferencePoint*> reference_points_for(AgentKind kind) const;

  // Nearest reference point for `kind`; ties resolve to the lexicographically smallest label.
  std::optional<std::pair<const ReferencePoint*, double>> nearest_reference(Vec2 p, AgentKind kind) const;

  // Lane sequence connecting the entry branch to the exit branch, found by breadth-first search
  // over successors. Empty when no route exists.
  std::vector<std::string> route_lanes(const std::string& entry, const std::string& exit, AgentKind kind) const;

  // True when lane `a` must give way to lane `b` at their shared conflict. Equal ranks
  // resolve by the right-hand rule.
  bool yields_to(const std::string& a, const std::string& b) const;

 private:
  void compute_zones();

  std::vector<LaneConflict> conflicts_;
  std::map<std::string, std::size_t> lane_index_;
};

TrafficSpace load_traffic_space(const std::filesystem::path& map_file);
TrafficSpace parse_traffic_space(const std::string& json_text);
std::string traffic_space_to_json(const TrafficSpace& space);

bool is_compass_label(const std::string& label);
// Compass bearing of the label in radians, E = 0, N = pi/2.
double compass_angle(const std::string& label);

}  // namespace junction
