#include "junction/trajdata.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "junction/csv.hpp"

namespace junction {

double Track::path_length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    len += distance(samples[i - 1].position, samples[i].position);
  }
  return len;
}

double Track::max_speed() const {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, speed(s));
  return m;
}

const Track* Recording::find(int track_id) const {
  auto it = std::lower_bound(tracks.begin(), tracks.end(), track_id,
                             [](const Track& t, int id) { return t.track_id < id; });
  if (it != tracks.end() && it->track_id == track_id) return &*it;
  for (const auto& t : tracks) {
    if (t.track_id == track_id) return &t;
  }
  return nullptr;
}

namespace {

const char* const kCanonical[] = {"recording_id", "frame_rate", "traffic_space_id", "affine_xx", "affine_xy",
                                  "affine_yx",    "affine_yy",  "affine_tx",        "affine_ty", "track_id",
                                  "kind",         "width",      "length",           "frame",     "x",
                                  "y",            "heading",    "vx",               "vy",        "ax",
                                  "ay"};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t require_column(const csv::Table& t, const ColumnMap& cm, const std::string& canonical,
                           const std::string& file_label) {
  if (!cm.has(canonical)) {
    throw IngestError("column map has no entry for required column '" + canonical + "'");
  }
  const auto& src = cm.source(canonical);
  auto idx = t.column(src);
  if (!idx) {
    throw IngestError(file_label + ": missing column '" + src + "' (canonical '" + canonical + "')");
  }
  return *idx;
}

std::optional<std::size_t> optional_column(const csv::Table& t, const ColumnMap& cm, const std::string& canonical,
                                           const std::string& file_label) {
  if (!cm.has(canonical)) return std::nullopt;
  return require_column(t, cm, canonical, file_label);
}

double num(const csv::Table& t, std::size_t row, std::size_t col, const std::string& what) {
  try {
    return csv::parse_double(t.cell(row, col), what);
  } catch (const std::invalid_argument& e) {
    throw IngestError(std::string(e.what()) + " (row " + std::to_string(row + 2) + ")");
  }
}

long long integer(const csv::Table& t, std::size_t row, std::size_t col, const std::string& what) {
  try {
    return csv::parse_int(t.cell(row, col), what);
  } catch (const std::invalid_argument& e) {
    throw IngestError(std::string(e.what()) + " (row " + std::to_string(row + 2) + ")");
  }
}

struct Affine {
  double xx = 1, xy = 0, yx = 0, yy = 1, tx = 0, ty = 0;
  Vec2 point(Vec2 p) const { return {xx * p.x + xy * p.y + tx, yx * p.x + yy * p.y + ty}; }
  Vec2 vector(Vec2 v) const { return {xx * v.x + xy * v.y, yx * v.x + yy * v.y}; }
  double rotation() const { return std::atan2(yx, xx); }
};

}  // namespace

ColumnMap ColumnMap::identity() {
  ColumnMap cm;
  for (const char* c : kCanonical) {
    const std::string name = c;
    if (name.rfind("affine_", 0) == 0) continue;
    cm.entries[name] = name;
  }
  return cm;
}

ColumnMap ColumnMap::read(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IngestError("cannot open column map " + file.string());
  ColumnMap cm;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw IngestError(file.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    cm.entries[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return cm;
}

const std::string& ColumnMap::source(const std::string& canonical) const {
  auto it = entries.find(canonical);
  if (it == entries.end()) throw IngestError("column map has no entry for '" + canonical + "'");
  return it->second;
}

std::vector<Vec2> central_differences(const std::vector<Vec2>& values, double rate) {
  const std::size_t n = values.size();
  std::vector<Vec2> out(n);
  if (n < 2) return out;
  out[0] = (values[1] - values[0]) * rate;
  out[n - 1] = (values[n - 1] - values[n - 2]) * rate;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out[i] = (values[i + 1] - values[i - 1]) * (0.5 * rate);
  }
  return out;
}

void finalize_track(Track& track) {
  auto& s = track.samples;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i].frame <= s[i - 1].frame) {
      throw IngestError("track " + std::to_string(track.track_id) + ": non-monotone frames (" +
                        std::to_string(s[i - 1].frame) + " then " + std::to_string(s[i].frame) + ")");
    }
  }
  if (!s.empty() && s.front().frame < 0) {
    throw IngestError("track " + std::to_string(track.track_id) + ": negative frame index");
  }
  std::vector<TrackSample> filled;
  filled.reserve(s.empty() ? 0 : static_cast<std::size_t>(s.back().frame - s.front().frame + 1));
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i > 0) {
      const auto& a = s[i - 1];
      const auto& b = s[i];
      const long long gap = b.frame - a.frame;
      for (long long f = a.frame + 1; f < b.frame; ++f) {
        const double t = static_cast<double>(f - a.frame) / static_cast<double>(gap);
        TrackSample m;
        m.frame = f;
        m.position = a.position + (b.position - a.position) * t;
        m.velocity = a.velocity + (b.velocity - a.velocity) * t;
        m.acceleration = a.acceleration + (b.acceleration - a.acceleration) * t;
        m.heading = wrap_angle(a.heading + wrap_angle(b.heading - a.heading) * t);
        filled.push_back(m);
        ++track.repaired_frames;
      }
    }
    auto sample = s[i];
    sample.heading = wrap_angle(sample.heading);
    filled.push_back(sample);
  }
  s = std::move(filled);
  for (const auto& smp : s) {
    if (!smp.position.finite() || !smp.velocity.finite() || !smp.acceleration.finite() ||
        !std::isfinite(smp.heading)) {
      throw IngestError("track " + std::to_string(track.track_id) + ": non-finite value at frame " +
                        std::to_string(smp.frame));
    }
  }
  if (track.width < 0.0 || track.length < 0.0) {
    throw IngestError("track " + std::to_string(track.track_id) + ": negative dimensions");
  }
  if (s.empty()) {
    track.initial_frame = 0;
    track.final_frame = -1;
  } else {
    track.initial_frame = s.front().frame;
    track.final_frame = s.back().frame;
  }
}

Recording load_recording(const RecordingFiles& files, const ColumnMap& cm) {
  Recording rec;

  const auto meta = csv::Table::read(files.meta);
  const std::string meta_label = files.meta.filename().string();
  if (meta.rows() < 1) throw IngestError(meta_label + ": no data row");
  rec.recording_id = static_cast<int>(integer(meta, 0, require_column(meta, cm, "recording_id", meta_label), "recording_id"));
  if (auto c = optional_column(meta, cm, "frame_rate", meta_label)) {
    rec.frame_rate = num(meta, 0, *c, "frame_rate");
  }
  if (!(rec.frame_rate > 0.0)) throw IngestError(meta_label + ": frame_rate must be positive");
  if (auto c = optional_column(meta, cm, "traffic_space_id", meta_label)) {
    rec.traffic_space_id = meta.cell(0, *c);
  }
  Affine affine;
  bool has_affine = false;
  {
    const char* keys[] = {"affine_xx", "affine_xy", "affine_yx", "affine_yy", "affine_tx", "affine_ty"};
    double* slots[] = {&affine.xx, &affine.xy, &affine.yx, &affine.yy, &affine.tx, &affine.ty};
    for (int i = 0; i < 6; ++i) {
      if (cm.has(keys[i])) has_affine = true;
    }
    if (has_affine) {
      for (int i = 0; i < 6; ++i) {
        *slots[i] = num(meta, 0, require_column(meta, cm, keys[i], meta_label), keys[i]);
      }
    }
  }

  const auto tmeta = csv::Table::read(files.tracks_meta);
  const std::string tmeta_label = files.tracks_meta.filename().string();
  const auto c_tid = require_column(tmeta, cm, "track_id", tmeta_label);
  const auto c_kind = require_column(tmeta, cm, "kind", tmeta_label);
  const auto c_w = optional_column(tmeta, cm, "width", tmeta_label);
  const auto c_l = optional_column(tmeta, cm, "length", tmeta_label);
  std::map<int, Track> tracks;
  for (std::size_t r = 0; r < tmeta.rows(); ++r) {
    Track t;
    t.track_id = static_cast<int>(integer(tmeta, r, c_tid, "track_id"));
    const auto kind = parse_agent_kind(tmeta.cell(r, c_kind));
    if (!kind) {
      throw IngestError(tmeta_label + ": unknown kind '" + tmeta.cell(r, c_kind) + "' for track " +
                        std::to_string(t.track_id));
    }
    t.kind = *kind;
    if (c_w) t.width = num(tmeta, r, *c_w, "width");
    if (c_l) t.length = num(tmeta, r, *c_l, "length");
    if (tracks.contains(t.track_id)) {
      throw IngestError(tmeta_label + ": duplicate track_id " + std::to_string(t.track_id));
    }
    tracks.emplace(t.track_id, std::move(t));
  }

  const auto samples = csv::Table::read(files.tracks);
  const std::string s_label = files.tracks.filename().string();
  const auto c_stid = require_column(samples, cm, "track_id", s_label);
  const auto c_frame = require_column(samples, cm, "frame", s_label);
  const auto c_x = require_column(samples, cm, "x", s_label);
  const auto c_y = require_column(samples, cm, "y", s_label);
  const auto c_h = optional_column(samples, cm, "heading", s_label);
  const auto c_vx = optional_column(samples, cm, "vx", s_label);
  const auto c_vy = optional_column(samples, cm, "vy", s_label);
  const auto c_ax = optional_column(samples, cm, "ax", s_label);
  const auto c_ay = optional_column(samples, cm, "ay", s_label);
  const bool has_velocity = c_vx && c_vy;
  const bool has_accel = c_ax && c_ay;
  const bool heading_deg = cm.entries.contains("heading_unit") && cm.source("heading_unit") == "deg";

  for (std::size_t r = 0; r < samples.rows(); ++r) {
    const int tid = static_cast<int>(integer(samples, r, c_stid, "track_id"));
    auto it = tracks.find(tid);
    if (it == tracks.end()) {
      throw IngestError(s_label + ": samples for track " + std::to_string(tid) + " missing from track meta");
    }
    TrackSample s;
    s.frame = integer(samples, r, c_frame, "frame");
    s.position = {num(samples, r, c_x, "x"), num(samples, r, c_y, "y")};
    if (c_h) {
      s.heading = num(samples, r, *c_h, "heading");
      if (heading_deg) s.heading *= std::numbers::pi / 180.0;
    }
    if (has_velocity) s.velocity = {num(samples, r, *c_vx, "vx"), num(samples, r, *c_vy, "vy")};
    if (has_accel) s.acceleration = {num(samples, r, *c_ax, "ax"), num(samples, r, *c_ay, "ay")};
    if (has_affine) {
      s.position = affine.point(s.position);
      s.velocity = affine.vector(s.velocity);
      s.acceleration = affine.vector(s.acceleration);
      s.heading += affine.rotation();
    }
    it->second.samples.push_back(s);
  }

  for (auto& [id, t] : tracks) {
    for (std::size_t i = 1; i < t.samples.size(); ++i) {
      if (t.samples[i].frame <= t.samples[i - 1].frame) {
        throw IngestError("track " + std::to_string(t.track_id) + ": non-monotone frames (" +
                          std::to_string(t.samples[i - 1].frame) + " then " + std::to_string(t.samples[i].frame) +
                          ")");
      }
    }
    const bool gapless = t.samples.empty() || t.samples.back().frame - t.samples.front().frame + 1 ==
                                                   static_cast<long long>(t.samples.size());
    if (!has_velocity || !has_accel || !c_h) {
      if (!gapless) {
        // Repair first so that differences are taken at uniform spacing.
        finalize_track(t);
      }
      std::vector<Vec2> pos;
      pos.reserve(t.samples.size());
      for (const auto& s : t.samples) pos.push_back(s.position);
      if (!has_velocity) {
        const auto vel = central_differences(pos, rec.frame_rate);
        for (std::size_t i = 0; i < t.samples.size(); ++i) t.samples[i].velocity = vel[i];
      }
      if (!has_accel) {
        std::vector<Vec2> vel;
        vel.reserve(t.samples.size());
        for (const auto& s : t.samples) vel.push_back(s.velocity);
        const auto acc = central_differences(vel, rec.frame_rate);
        for (std::size_t i = 0; i < t.samples.size(); ++i) t.samples[i].acceleration = acc[i];
      }
      if (!c_h) {
        double last = 0.0;
        bool have = false;
        for (auto& s : t.samples) {
          if (speed(s) > 0.1) {
            last = std::atan2(s.velocity.y, s.velocity.x);
            have = true;
          }
          s.heading = last;
        }
        if (have) {
          // Back-fill leading slow samples with the first reliable heading.
          double first = 0.0;
          for (const auto& s : t.samples) {
            if (speed(s) > 0.1) {
              first = std::atan2(s.velocity.y, s.velocity.x);
              break;
            }
          }
          for (auto& s : t.samples) {
            if (speed(s) > 0.1) break;
            s.heading = first;
          }
        }
      }
    }
    finalize_track(t);
    rec.tracks.push_back(std::move(t));
  }
  return rec;
}

void save_recording(const Recording& rec, const RecordingFiles& files) {
  {
    std::ofstream out(files.meta);
    if (!out) throw DataError("cannot write " + files.meta.string());
    csv::Writer w(out);
    w.row({"recording_id", "frame_rate", "traffic_space_id"});
    w.field(static_cast<long long>(rec.recording_id)).field(rec.frame_rate).field(rec.traffic_space_id).end_row();
  }
  {
    std::ofstream out(files.tracks_meta);
    if (!out) throw DataError("cannot write " + files.tracks_meta.string());
    csv::Writer w(out);
    w.row({"track_id", "kind", "width", "length", "initial_frame", "final_frame"});
    for (const auto& t : rec.tracks) {
      w.field(t.track_id).field(to_string(t.kind)).field(t.width).field(t.length);
      w.field(t.initial_frame).field(t.final_frame).end_row();
    }
  }
  {
    std::ofstream out(files.tracks);
    if (!out) throw DataError("cannot write " + files.tracks.string());
    csv::Writer w(out);
    w.row({"track_id", "frame", "x", "y", "heading", "vx", "vy", "ax", "ay"});
    for (const auto& t : rec.tracks) {
      for (const auto& s : t.samples) {
        w.field(t.track_id).field(s.frame).field(s.position.x).field(s.position.y).field(s.heading);
        w.field(s.velocity.x).field(s.velocity.y).field(s.acceleration.x).field(s.acceleration.y).end_row();
      }
    }
  }
}

}  // namespace junction
