#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "junction/extraction.hpp"
#include "junction/traffic_space.hpp"
#include "junction/trajdata.hpp"

namespace junction {

// Four-arm right-hand-traffic intersection centered at the origin. N-S is the major road;
// E and W approaches carry a yield line. Lanes: in_<B>, out_<B>, connectors c_<B>_<X>, and
// two pedestrian lanes xw_<B>_0 / xw_<B>_1 along each crosswalk.
struct IntersectionOptions {
  std::string id = "synthetic-x";
  double arm_length = 50.0;     // reference points sit at the arm ends
  double junction_edge = 8.0;   // distance from the center where connectors start
  double lane_width = 3.5;
  double speed_limit = 13.9;
  double crosswalk_near = 13.5;  // crosswalk band, distance from the center
  double crosswalk_far = 16.5;
  double crosswalk_half_span = 4.5;
  bool crosswalks = true;
};

TrafficSpace make_intersection(const IntersectionOptions& opt = {});

// Concatenated centerlines of the lane route from entry to exit. Throws ConfigError when
// the space has no such route.
Polyline lane_route_path(const TrafficSpace& space, const std::string& entry, const std::string& exit, AgentKind kind);

// Piecewise constant-acceleration motion along a path: optional initial standstill, cruise,
// optional stop at stop_s followed by a wait, then back to cruise speed.
struct SpeedProfile {
  double cruise = 10.0;
  double initial_wait = 0.0;
  std::optional<double> stop_s;
  double stop_wait = 0.0;
  double decel = 2.0;
  double accel = 1.5;

  double s_at(double t) const;
  double v_at(double t) const;
  double a_at(double t) const;
  // First time at which s_at(t) >= s.
  double time_at(double s) const;

 private:
  struct Phase {
    double t0, s0, v0, a, duration;
  };
  std::vector<Phase> phases() const;
  const Phase& phase_at(const std::vector<Phase>& ph, double t) const;
};

// Samples the profile every frame from t0 (seconds) until the path end is reached.
Track scripted_track(int track_id, AgentKind kind, const Polyline& path, const SpeedProfile& profile, double t0,
                     double frame_rate, double length = 0.0, double width = 0.0);

// First arc length along `a` whose point lies within `reach` of path `b`; nullopt if none.
std::optional<double> first_contact_s(const Polyline& a, const Polyline& b, double reach, double step = 0.25);

struct PlantedPair {
  int ego_id = 0;
  int challenger_id = 0;
  ScenarioCategory category = ScenarioCategory::v2v;
  std::string functional_type;  // intended type name
  double design_gap = 0.0;      // challenger arrival minus ego arrival at first path contact [s]
  bool decoy = false;
};

struct PlantedRecording {
  Recording recording;
  std::vector<PlantedPair> pairs;
};

// One ego car and one challenger per time slot: 8 v2v, 6 v2p and 6 v2b pairs below the PET
// threshold, plus 3 v2v, 3 v2b and 4 v2p decoys well above it.
PlantedRecording make_planted_recording(const TrafficSpace& space, double frame_rate = 25.0);

void write_planted_pairs(std::ostream& out, const std::vector<PlantedPair>& pairs);
std::vector<PlantedPair> read_planted_pairs(std::istream& in);

}  // namespace junction
