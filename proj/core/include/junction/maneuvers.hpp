#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "junction/traffic_space.hpp"
#include "junction/trajdata.hpp"

namespace junction {

struct BranchLabel {
  std::string entry;
  std::string exit;

  std::string str() const { return entry + exit; }
  auto operator<=>(const BranchLabel&) const = default;
};

enum class ManeuverType { through, left, right, u_turn, special, invalid };
std::string_view to_string(ManeuverType m);
std::optional<ManeuverType> parse_maneuver(std::string_view text);
inline bool is_regular(ManeuverType m) {
  return m == ManeuverType::through || m == ManeuverType::left || m == ManeuverType::right ||
         m == ManeuverType::u_turn;
}

using ManeuverTable = std::map<BranchLabel, ManeuverType>;

// Right-hand traffic table over all compass label pairs: signed turn between the inbound
// and outbound directions, > 45 deg left, < -45 deg right, otherwise through; entry == exit
// is special.
ManeuverTable right_hand_default_table();

struct LabelingConfig {
  int endpoint_window = 5;
  double max_assign_distance = 10.0;
  ManeuverTable vehicle_table = right_hand_default_table();
  ManeuverTable vru_table = right_hand_default_table();

  void validate() const;
  const ManeuverTable& table_for(AgentKind kind) const { return is_vru(kind) ? vru_table : vehicle_table; }
};

struct LabelAssignment {
  std::optional<BranchLabel> label;  // absent when an endpoint is too far from every reference point
  BranchLabel nearest;               // nearest labels regardless of the distance gate
  double entry_distance = 0.0;
  double exit_distance = 0.0;
};

// Nearest-reference assignment of the averaged first/last endpoint_window positions, i.e. the
// assignment step of k-means with centroids pinned to the reference points.
LabelAssignment assign_branch_label(const Track& track, const TrafficSpace& space, const LabelingConfig& cfg);

ManeuverType classify_maneuver(const BranchLabel& label, AgentKind kind, const LabelingConfig& cfg);

struct LabeledTrack {
  int track_id = 0;
  AgentKind kind = AgentKind::car;
  std::optional<BranchLabel> label;
  ManeuverType maneuver = ManeuverType::invalid;
};

struct LabelTable {
  std::vector<LabeledTrack> rows;  // ordered by track id
  std::map<std::string, int> label_counts;
  std::map<ManeuverType, int> maneuver_counts;

  const LabeledTrack* find(int track_id) const;
};

LabelTable label_recording(const Recording& recording, const TrafficSpace& space, const LabelingConfig& cfg);

void write_label_table(std::ostream& out, const LabelTable& table);

}  // namespace junction
