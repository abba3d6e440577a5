#include "junction/preprocess.hpp"

#include <cmath>
#include <ostream>

#include "junction/csv.hpp"

namespace junction {

FilterRules FilterRules::defaults(double frame_rate) {
  FilterRules r;
  const auto frames = [frame_rate](double seconds) { return static_cast<long long>(std::ceil(seconds * frame_rate)); };
  for (auto k : kAllKinds) {
    if (k == AgentKind::pedestrian) {
      r.max_speed_by_kind[k] = 4.0;
      r.min_lifetime_frames_by_kind[k] = frames(1.0);
    } else if (k == AgentKind::bicycle) {
      r.max_speed_by_kind[k] = 12.0;
      r.min_lifetime_frames_by_kind[k] = frames(1.0);
    } else {
      r.max_speed_by_kind[k] = 30.0;
      r.min_lifetime_frames_by_kind[k] = frames(2.0);
    }
  }
  r.min_path_length = 1.0;
  return r;
}

void FilterRules::validate() const {
  for (auto k : kAllKinds) {
    auto s = max_speed_by_kind.find(k);
    if (s == max_speed_by_kind.end() || !(s->second > 0.0)) {
      throw ConfigError("filter.max_speed." + std::string(to_string(k)) + " must be > 0");
    }
    auto l = min_lifetime_frames_by_kind.find(k);
    if (l == min_lifetime_frames_by_kind.end() || l->second <= 0) {
      throw ConfigError("filter.min_lifetime." + std::string(to_string(k)) + " must be > 0");
    }
  }
  if (!(min_path_length > 0.0)) throw ConfigError("filter.min_path_length must be > 0");
}

std::string_view to_string(FilterRule rule) {
  switch (rule) {
    case FilterRule::max_speed: return "max_speed";
    case FilterRule::min_lifetime: return "min_lifetime";
    case FilterRule::min_path_length: return "min_path_length";
  }
  return "max_speed";
}

std::optional<Removal> check_track(const Track& track, const FilterRules& rules) {
  const double vmax = track.max_speed();
  if (vmax > rules.max_speed_by_kind.at(track.kind)) {
    return Removal{track.track_id, FilterRule::max_speed, vmax};
  }
  const auto frames = static_cast<long long>(track.samples.size());
  if (frames < rules.min_lifetime_frames_by_kind.at(track.kind)) {
    return Removal{track.track_id, FilterRule::min_lifetime, static_cast<double>(frames)};
  }
  const double len = track.path_length();
  if (len < rules.min_path_length) {
    return Removal{track.track_id, FilterRule::min_path_length, len};
  }
  return std::nullopt;
}

std::pair<Recording, FilterReport> filter_tracks(const Recording& recording, const FilterRules& rules) {
  rules.validate();
  Recording out;
  out.recording_id = recording.recording_id;
  out.frame_rate = recording.frame_rate;
  out.traffic_space_id = recording.traffic_space_id;
  FilterReport report;
  for (const auto& t : recording.tracks) {
    if (auto removal = check_track(t, rules)) {
      report.removed.push_back(*removal);
    } else {
      report.kept.push_back(t.track_id);
      out.tracks.push_back(t);
    }
  }
  return {std::move(out), std::move(report)};
}

void write_filter_report(std::ostream& out, const FilterReport& report) {
  csv::Writer w(out);
  w.row({"track_id", "status", "rule", "value"});
  for (int id : report.kept) {
    w.field(id).field("kept").empty_field().empty_field().end_row();
  }
  for (const auto& r : report.removed) {
    w.field(r.track_id).field("removed").field(to_string(r.rule)).field(r.value).end_row();
  }
}

}  // namespace junction
