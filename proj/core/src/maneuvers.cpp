#include "junction/maneuvers.hpp"

#include <algorithm>
#include <ostream>

#include "junction/csv.hpp"

namespace junction {

std::string_view to_string(ManeuverType m) {
  switch (m) {
    case ManeuverType::through: return "through";
    case ManeuverType::left: return "left";
    case ManeuverType::right: return "right";
    case ManeuverType::u_turn: return "u_turn";
    case ManeuverType::special: return "special";
    case ManeuverType::invalid: return "invalid";
  }
  return "invalid";
}

std::optional<ManeuverType> parse_maneuver(std::string_view text) {
  for (auto m : {ManeuverType::through, ManeuverType::left, ManeuverType::right, ManeuverType::u_turn,
                 ManeuverType::special, ManeuverType::invalid}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

ManeuverTable right_hand_default_table() {
  static const char* const labels[] = {"N", "NE", "E", "SE", "S", "SW", "W", "NW"};
  ManeuverTable table;
  for (const char* entry : labels) {
    for (const char* exit : labels) {
      BranchLabel l{entry, exit};
      if (l.entry == l.exit) {
        table[l] = ManeuverType::special;
        continue;
      }
      // Travel direction on entry points from the entry branch toward the centre.
      const double inbound = compass_angle(entry) + std::numbers::pi;
      const double outbound = compass_angle(exit);
      const double turn = wrap_angle(outbound - inbound);
      constexpr double quarter = std::numbers::pi / 4.0;
      if (turn > quarter) {
        table[l] = ManeuverType::left;
      } else if (turn < -quarter) {
        table[l] = ManeuverType::right;
      } else {
        table[l] = ManeuverType::through;
      }
    }
  }
  return table;
}

void LabelingConfig::validate() const {
  if (endpoint_window < 1) throw ConfigError("labeling.endpoint_window must be >= 1");
  if (!(max_assign_distance > 0.0)) throw ConfigError("labeling.max_assign_distance must be > 0");
}

namespace {

Vec2 endpoint_mean(const Track& track, int window, bool from_start) {
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(window), track.samples.size());
  Vec2 acc;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = from_start ? track.samples[i] : track.samples[track.samples.size() - 1 - i];
    acc += s.position;
  }
  return acc / static_cast<double>(n);
}

}  // namespace

LabelAssignment assign_branch_label(const Track& track, const TrafficSpace& space, const LabelingConfig& cfg) {
  if (space.reference_points_for(track.kind).empty()) {
    throw ConfigError("traffic space " + space.id + " has no reference points for kind " +
                      std::string(to_string(track.kind)));
  }
  LabelAssignment out;
  if (track.samples.empty()) return out;
  const auto entry = space.nearest_reference(endpoint_mean(track, cfg.endpoint_window, true), track.kind);
  const auto exit = space.nearest_reference(endpoint_mean(track, cfg.endpoint_window, false), track.kind);
  out.nearest = {entry->first->label, exit->first->label};
  out.entry_distance = entry->second;
  out.exit_distance = exit->second;
  if (out.entry_distance <= cfg.max_assign_distance && out.exit_distance <= cfg.max_assign_distance) {
    out.label = out.nearest;
  }
  return out;
}

ManeuverType classify_maneuver(const BranchLabel& label, AgentKind kind, const LabelingConfig& cfg) {
  const auto& table = cfg.table_for(kind);
  auto it = table.find(label);
  return it == table.end() ? ManeuverType::special : it->second;
}

const LabeledTrack* LabelTable::find(int track_id) const {
  auto it = std::lower_bound(rows.begin(), rows.end(), track_id,
                             [](const LabeledTrack& r, int id) { return r.track_id < id; });
  return it != rows.end() && it->track_id == track_id ? &*it : nullptr;
}

LabelTable label_recording(const Recording& recording, const TrafficSpace& space, const LabelingConfig& cfg) {
  cfg.validate();
  LabelTable table;
  for (const auto& t : recording.tracks) {
    LabeledTrack row;
    row.track_id = t.track_id;
    row.kind = t.kind;
    const auto a = assign_branch_label(t, space, cfg);
    row.label = a.label;
    row.maneuver = a.label ? classify_maneuver(*a.label, t.kind, cfg) : ManeuverType::invalid;
    table.label_counts[a.label ? a.label->str() : std::string("unassigned")]++;
    table.maneuver_counts[row.maneuver]++;
    table.rows.push_back(std::move(row));
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const LabeledTrack& a, const LabeledTrack& b) { return a.track_id < b.track_id; });
  return table;
}

void write_label_table(std::ostream& out, const LabelTable& table) {
  csv::Writer w(out);
  w.row({"track_id", "label", "maneuver"});
  for (const auto& r : table.rows) {
    w.field(r.track_id);
    if (r.label) {
      w.field(r.label->str());
    } else {
      w.empty_field();
    }
    w.field(to_string(r.maneuver)).end_row();
  }
}

}  // namespace junction
