#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "junction/trajdata.hpp"

namespace junction {

// Plausibility thresholds applied per agent kind.
struct FilterRules {
  std::map<AgentKind, double> max_speed_by_kind;
  std::map<AgentKind, long long> min_lifetime_frames_by_kind;
  double min_path_length = 1.0;

  // Pedestrians 4 m/s, bicycles 12 m/s, motor vehicles 30 m/s; lifetime 2 s for motor
  // vehicles and 1 s for pedestrians and bicycles at the given frame rate.
  static FilterRules defaults(double frame_rate);
  void validate() const;
};

enum class FilterRule { max_speed, min_lifetime, min_path_length };
std::string_view to_string(FilterRule rule);

struct Removal {
  int track_id = 0;
  FilterRule rule = FilterRule::max_speed;
  double value = 0.0;
};

struct FilterReport {
  std::vector<int> kept;
  std::vector<Removal> removed;
};

// First violated rule for a track, checked in the order speed, lifetime, path length.
std::optional<Removal> check_track(const Track& track, const FilterRules& rules);

std::pair<Recording, FilterReport> filter_tracks(const Recording& recording, const FilterRules& rules);

void write_filter_report(std::ostream& out, const FilterReport& report);

}  // namespace junction
