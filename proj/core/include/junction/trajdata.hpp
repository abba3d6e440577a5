#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "junction/types.hpp"

namespace junction {

struct TrackSample {
  long long frame = 0;
  Vec2 position;
  double heading = 0.0;  // radians, CCW from +x, in (-pi, pi]
  Vec2 velocity;
  Vec2 acceleration;

  bool operator==(const TrackSample&) const = default;
};

inline double speed(const TrackSample& s) { return s.velocity.norm(); }

struct Track {
  int track_id = 0;
  AgentKind kind = AgentKind::car;
  double width = 0.0;
  double length = 0.0;
  std::vector<TrackSample> samples;
  long long initial_frame = 0;
  long long final_frame = -1;
  // Frames filled in by linear interpolation during ingestion.
  int repaired_frames = 0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  bool has_frame(long long f) const { return f >= initial_frame && f <= final_frame && !samples.empty(); }
  const TrackSample& at_frame(long long f) const { return samples[static_cast<std::size_t>(f - initial_frame)]; }
  double lifetime_seconds(double frame_rate) const {
    return static_cast<double>(final_frame - initial_frame + 1) / frame_rate;
  }
  double path_length() const;
  double max_speed() const;

  bool operator==(const Track&) const = default;
};

struct Recording {
  int recording_id = 0;
  double frame_rate = 25.0;
  std::string traffic_space_id;
  std::vector<Track> tracks;

  const Track* find(int track_id) const;
  double frame_period() const { return 1.0 / frame_rate; }
};

// Canonical field name -> source header. Canonical names:
//   meta:        recording_id, frame_rate, traffic_space_id,
//                affine_xx, affine_xy, affine_yx, affine_yy, affine_tx, affine_ty
//   tracks meta: track_id, kind, width, length
//   tracks:      track_id, frame, x, y, heading, vx, vy, ax, ay
// Options (not columns): heading_unit = rad | deg.
struct ColumnMap {
  std::map<std::string, std::string> entries;

  static ColumnMap identity();
  static ColumnMap read(const std::filesystem::path& file);
  bool has(const std::string& canonical) const { return entries.contains(canonical); }
  const std::string& source(const std::string& canonical) const;
};

struct RecordingFiles {
  std::filesystem::path meta;
  std::filesystem::path tracks_meta;
  std::filesystem::path tracks;
};

Recording load_recording(const RecordingFiles& files, const ColumnMap& columns);
// Writes the canonical CSV triple; positions round-trip bit-identically.
void save_recording(const Recording& rec, const RecordingFiles& files);

// Validates invariants and fills initial/final frames; gaps are repaired by linear
// interpolation. Throws IngestError on non-monotone frames.
void finalize_track(Track& track);

// Central differences at the given rate, one-sided at the ends.
std::vector<Vec2> central_differences(const std::vector<Vec2>& values, double rate);

}  // namespace junction
