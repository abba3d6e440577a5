#include "junction/extraction.hpp"

#include <algorithm>
#include <atomic>
#include <ostream>
#include <thread>

#include "junction/csv.hpp"

namespace junction {

std::string_view to_string(ScenarioCategory c) {
  switch (c) {
    case ScenarioCategory::v2v: return "v2v";
    case ScenarioCategory::v2p: return "v2p";
    case ScenarioCategory::v2b: return "v2b";
  }
  return "v2v";
}

std::optional<ScenarioCategory> parse_category(std::string_view text) {
  if (text == "v2v") return ScenarioCategory::v2v;
  if (text == "v2p") return ScenarioCategory::v2p;
  if (text == "v2b") return ScenarioCategory::v2b;
  return std::nullopt;
}

std::optional<ScenarioCategory> categorize(AgentKind ego, AgentKind challenger) {
  if (ego != AgentKind::car) return std::nullopt;
  if (is_motor_vehicle(challenger)) return ScenarioCategory::v2v;
  if (challenger == AgentKind::pedestrian) return ScenarioCategory::v2p;
  return ScenarioCategory::v2b;
}

std::string_view to_string(ApproachRelation r) {
  switch (r) {
    case ApproachRelation::same: return "same";
    case ApproachRelation::oncoming: return "oncoming";
    case ApproachRelation::from_left: return "from_left";
    case ApproachRelation::from_right: return "from_right";
  }
  return "same";
}

ApproachRelation approach_relation(const std::string& ego_entry, const std::string& challenger_entry) {
  const double diff = wrap_angle(compass_angle(challenger_entry) - compass_angle(ego_entry));
  constexpr double quarter = std::numbers::pi / 4.0;
  if (std::abs(diff) < quarter) return ApproachRelation::same;
  if (std::abs(diff) > 3.0 * quarter) return ApproachRelation::oncoming;
  // The ego travels opposite to its entry bearing; branches clockwise from the entry are on its left.
  return diff < 0.0 ? ApproachRelation::from_left : ApproachRelation::from_right;
}

Taxonomy Taxonomy::defaults() {
  using M = ManeuverType;
  using R = ApproachRelation;
  const std::set<R> lateral{R::from_left, R::from_right};
  const std::set<M> turning{M::left, M::right};
  Taxonomy t;
  t.v2v_rules = {
      {{}, {}, {R::same}, "same-direction-following"},
      {{M::through}, {M::through}, {R::from_left}, "SCP/left"},
      {{M::through}, {M::through}, {R::from_right}, "SCP/right"},
      {{M::through}, {M::through}, {R::oncoming}, "oncoming-straight"},
      {{M::left}, {M::through}, {R::oncoming}, "LTAP/OD"},
      {{M::left}, {M::through}, {R::from_left}, "LTAP/LD"},
      {{M::left}, {M::through}, {R::from_right}, "turn-into/LD"},
      {{M::right}, {M::through}, {R::from_left}, "RTAP/LD"},
      {{M::left}, {M::right}, {R::oncoming}, "turn-into/OD"},
      {turning, turning, lateral, "merging-turns"},
  };
  return t;
}

std::vector<std::string> Taxonomy::type_names(ScenarioCategory c) const {
  std::vector<std::string> names;
  if (c == ScenarioCategory::v2p) return {cross, not_cross};
  for (const auto& r : v2v_rules) {
    if (std::find(names.begin(), names.end(), r.name) == names.end()) names.push_back(r.name);
  }
  if (c == ScenarioCategory::v2b) names.push_back(not_cross);
  names.push_back(unclassified);
  return names;
}

namespace {

ApproachRelation mirrored(ApproachRelation r) {
  if (r == ApproachRelation::from_left) return ApproachRelation::from_right;
  if (r == ApproachRelation::from_right) return ApproachRelation::from_left;
  return r;
}

bool matches(const TaxonomyRule& rule, ManeuverType ego, ManeuverType chal, ApproachRelation rel) {
  return (rule.ego.empty() || rule.ego.contains(ego)) && (rule.challenger.empty() || rule.challenger.contains(chal)) &&
         rule.relations.contains(rel);
}

}  // namespace

FunctionalType classify_functional_type(const IntersectingScenario& scn, const LabelTable& labels,
                                        const Taxonomy& taxonomy, bool has_conflict_area) {
  FunctionalType out;
  out.category = scn.category;
  if (scn.category == ScenarioCategory::v2p) {
    out.name = has_conflict_area ? taxonomy.cross : taxonomy.not_cross;
    return out;
  }
  if (scn.category == ScenarioCategory::v2b && !has_conflict_area) {
    out.name = taxonomy.not_cross;
    return out;
  }
  out.name = taxonomy.unclassified;
  const auto* ego = labels.find(scn.ego_track_id);
  const auto* chal = labels.find(scn.challenger_track_id);
  if (!ego || !chal || !ego->label || !chal->label) return out;
  const auto rel = approach_relation(ego->label->entry, chal->label->entry);
  for (const auto& rule : taxonomy.v2v_rules) {
    if (matches(rule, ego->maneuver, chal->maneuver, rel)) {
      out.name = rule.name;
      return out;
    }
  }
  // The taxonomy describes the pair, so the roles may be swapped.
  for (const auto& rule : taxonomy.v2v_rules) {
    if (matches(rule, chal->maneuver, ego->maneuver, mirrored(rel))) {
      out.name = rule.name;
      return out;
    }
  }
  return out;
}

std::map<long long, std::vector<int>> roi_neighbors(const Track& ego, std::span<const Track> others, double radius) {
  if (!(radius > 0.0)) throw ConfigError("roi radius must be > 0");
  std::map<long long, std::vector<int>> out;
  for (const auto& s : ego.samples) out[s.frame];
  for (const auto& o : others) {
    if (o.track_id == ego.track_id) continue;
    const long long lo = std::max(ego.initial_frame, o.initial_frame);
    const long long hi = std::min(ego.final_frame, o.final_frame);
    for (long long f = lo; f <= hi; ++f) {
      if (distance(ego.at_frame(f).position, o.at_frame(f).position) <= radius) out[f].push_back(o.track_id);
    }
  }
  for (auto& [f, ids] : out) std::sort(ids.begin(), ids.end());
  return out;
}

std::optional<long long> first_roi_contact(const Track& a, const Track& b, double radius) {
  const long long lo = std::max(a.initial_frame, b.initial_frame);
  const long long hi = std::min(a.final_frame, b.final_frame);
  for (long long f = lo; f <= hi; ++f) {
    if (distance(a.at_frame(f).position, b.at_frame(f).position) <= radius) return f;
  }
  return std::nullopt;
}

IntersectingScenario tailor_scenario(IntersectingScenario scn, const Track& ego, const Track& challenger,
                                     double roi_radius, const TailorMargins& margins, double frame_rate) {
  const long long life_lo = std::max(ego.initial_frame, challenger.initial_frame);
  const long long life_hi = std::min(ego.final_frame, challenger.final_frame);
  const long long contact = first_roi_contact(ego, challenger, roi_radius).value_or(life_lo);
  long long last_occ = scn.pet.last_occupancy_frame();
  if (last_occ == std::numeric_limits<long long>::min()) last_occ = life_hi;
  const auto lead = static_cast<long long>(std::llround(margins.lead_s * frame_rate));
  const auto tail = static_cast<long long>(std::llround(margins.tail_s * frame_rate));
  scn.window_start = std::clamp(contact - lead, life_lo, life_hi);
  scn.window_end = std::clamp(last_occ + tail, scn.window_start, life_hi);
  if (scn.conflict) {
    const Vec2 c = polygon_centroid(scn.conflict->polygon);
    auto dist_to_conflict = [&](const Track& t) {
      const Polyline p = path_of(t);
      if (p.size() < 2) return 0.0;
      return p.project(c).s - p.project(t.at_frame(scn.window_start).position).s;
    };
    scn.ego_distance_to_conflict = dist_to_conflict(ego);
    scn.challenger_distance_to_conflict = dist_to_conflict(challenger);
  }
  return scn;
}

Track clip_track(const Track& track, long long first_frame, long long last_frame) {
  Track out = track;
  out.samples.clear();
  for (const auto& s : track.samples) {
    if (s.frame >= first_frame && s.frame <= last_frame) out.samples.push_back(s);
  }
  if (out.samples.empty()) {
    out.initial_frame = 0;
    out.final_frame = -1;
  } else {
    out.initial_frame = out.samples.front().frame;
    out.final_frame = out.samples.back().frame;
  }
  return out;
}

const Track* ConcreteScenario::participant(int track_id) const {
  for (const auto& t : participants) {
    if (t.track_id == track_id) return &t;
  }
  return nullptr;
}

ConcreteScenario compose_complex_scenario(const IntersectingScenario& core, const Recording& recording,
                                          double roi_radius, const LabelTable* labels) {
  ConcreteScenario out;
  out.core = core;
  out.recording_id = recording.recording_id;
  out.traffic_space_id = recording.traffic_space_id;
  out.frame_rate = recording.frame_rate;
  std::set<int> ids{core.ego_track_id, core.challenger_track_id};
  std::vector<const Track*> core_vehicles;
  for (int id : {core.ego_track_id, core.challenger_track_id}) {
    const Track* t = recording.find(id);
    if (!t) throw DataError("scenario references unknown track " + std::to_string(id));
    if (is_motor_vehicle(t->kind)) core_vehicles.push_back(t);
  }
  for (const Track* cv : core_vehicles) {
    for (const auto& other : recording.tracks) {
      if (ids.contains(other.track_id)) continue;
      const long long lo = std::max({core.window_start, cv->initial_frame, other.initial_frame});
      const long long hi = std::min({core.window_end, cv->final_frame, other.final_frame});
      for (long long f = lo; f <= hi; ++f) {
        if (distance(cv->at_frame(f).position, other.at_frame(f).position) <= roi_radius) {
          ids.insert(other.track_id);
          break;
        }
      }
    }
  }
  for (int id : ids) {
    out.participants.push_back(clip_track(*recording.find(id), core.window_start, core.window_end));
    if (labels) {
      if (const auto* row = labels->find(id); row && row->label) out.labels[id] = *row->label;
    }
  }
  return out;
}

void ExtractionConfig::validate() const {
  if (!(roi_radius > 0.0)) throw ConfigError("extraction.roi_radius must be > 0");
  if (!(pet_threshold >= 0.0)) throw ConfigError("extraction.pet_threshold must be >= 0");
  if (!(critical_pet >= 0.0)) throw ConfigError("extraction.critical_pet must be >= 0");
  if (margins.lead_s < 0.0 || margins.tail_s < 0.0) throw ConfigError("extraction margins must be >= 0");
  if (!(path_spacing > 0.0)) throw ConfigError("extraction.path_spacing must be > 0");
  if (!(max_area_extent > 0.0)) throw ConfigError("extraction.max_area_extent must be > 0");
}

namespace {

struct PathCache {
  Polyline path;
  std::vector<Polygon> buffer;
  bool usable = false;
};

struct EgoOutput {
  std::vector<Candidate> candidates;
  std::vector<ConcreteScenario> scenarios;
};

EgoOutput extract_for_ego(const Track& ego, const Recording& rec, const LabelTable& labels,
                          const ExtractionConfig& cfg, const std::vector<PathCache>& paths,
                          const std::map<int, std::size_t>& index) {
  EgoOutput out;
  const auto& ego_path = paths[index.at(ego.track_id)];
  for (const auto& other : rec.tracks) {
    if (other.track_id == ego.track_id) continue;
    // Car-car pairs are visited once, with the lower id as ego.
    if (other.kind == AgentKind::car && other.track_id < ego.track_id) continue;
    const auto category = categorize(ego.kind, other.kind);
    if (!category) continue;
    if (!first_roi_contact(ego, other, cfg.roi_radius)) continue;

    Candidate cand;
    cand.ego_track_id = ego.track_id;
    cand.challenger_track_id = other.track_id;
    cand.category = *category;

    const auto& other_path = paths[index.at(other.track_id)];
    std::vector<ConflictArea> areas;
    if (ego_path.usable && other_path.usable) {
      for (auto& poly : intersect_polygons(ego_path.buffer, other_path.buffer)) {
        const Vec2 c = polygon_centroid(poly);
        ConflictArea area{std::move(poly), ego_path.path.project(c).s, other_path.path.project(c).s};
        for (auto& slice : slice_along(area, ego_path.path, other_path.path, cfg.max_area_extent)) {
          areas.push_back(std::move(slice));
        }
      }
    }
    cand.has_conflict_area = !areas.empty();

    IntersectingScenario scn;
    scn.ego_track_id = ego.track_id;
    scn.challenger_track_id = other.track_id;
    scn.category = *category;
    std::optional<std::size_t> best_area;
    for (std::size_t i = 0; i < areas.size(); ++i) {
      auto r = compute_pet(ego, other, areas[i], rec.frame_rate, cfg.footprint);
      if (r.pet && (!scn.pet.pet || *r.pet < *scn.pet.pet)) {
        scn.pet = std::move(r);
        best_area = i;
      } else if (!r.pet && !scn.pet.pet && scn.pet.reason.empty()) {
        scn.pet = std::move(r);
      }
    }
    if (areas.empty()) scn.pet.reason = "no conflict area";
    if (best_area) scn.conflict = areas[*best_area];
    scn.functional_type = classify_functional_type(scn, labels, cfg.taxonomy, cand.has_conflict_area);
    cand.functional_type = scn.functional_type;
    cand.pet = scn.pet;
    cand.retained = scn.pet.pet.has_value() && *scn.pet.pet <= cfg.pet_threshold;
    if (cand.retained) {
      scn.critical = *scn.pet.pet <= cfg.critical_pet;
      scn = tailor_scenario(std::move(scn), ego, other, cfg.roi_radius, cfg.margins, rec.frame_rate);
      out.scenarios.push_back(compose_complex_scenario(scn, rec, cfg.roi_radius, &labels));
    }
    out.candidates.push_back(std::move(cand));
  }
  return out;
}

}  // namespace

ExtractionResult extract_all(const Recording& recording, const TrafficSpace& space, const LabelTable& labels,
                             const ExtractionConfig& cfg) {
  (void)space;
  cfg.validate();
  Recording rec = recording;
  std::sort(rec.tracks.begin(), rec.tracks.end(), [](const Track& a, const Track& b) { return a.track_id < b.track_id; });

  std::map<int, std::size_t> index;
  std::vector<PathCache> paths(rec.tracks.size());
  for (std::size_t i = 0; i < rec.tracks.size(); ++i) {
    index[rec.tracks[i].track_id] = i;
    auto& pc = paths[i];
    pc.path = path_of(rec.tracks[i], cfg.path_spacing);
    if (pc.path.size() >= 2 && pc.path.length() > 0.0) {
      pc.buffer = buffer_polyline(pc.path, path_half_width(rec.tracks[i], cfg.footprint));
      pc.usable = true;
    }
  }

  std::vector<const Track*> egos;
  for (const auto& t : rec.tracks) {
    if (t.kind == AgentKind::car) egos.push_back(&t);
  }
  std::vector<EgoOutput> per_ego(egos.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(egos.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < egos.size(); i = next++) {
      per_ego[i] = extract_for_ego(*egos[i], rec, labels, cfg, paths, index);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  ExtractionResult result;
  for (auto& e : per_ego) {
    for (auto& c : e.candidates) result.candidates.push_back(std::move(c));
    for (auto& s : e.scenarios) result.scenarios.push_back(std::move(s));
  }
  return result;
}

void write_candidates(std::ostream& out, std::span<const Candidate> candidates) {
  csv::Writer w(out);
  w.row({"ego", "challenger", "category", "functional_type", "conflict_area", "pet", "collision", "retained", "reason"});
  for (const auto& c : candidates) {
    w.field(c.ego_track_id).field(c.challenger_track_id).field(to_string(c.category)).field(c.functional_type.name);
    w.field(c.has_conflict_area ? "1" : "0");
    if (c.pet.pet) {
      w.field(*c.pet.pet);
    } else {
      w.empty_field();
    }
    w.field(c.pet.collision ? "1" : "0").field(c.retained ? "1" : "0").field(c.pet.reason).end_row();
  }
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

FiveNumberSummary five_number_summary(std::string type, std::vector<double> values) {
  FiveNumberSummary s;
  s.type = std::move(type);
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.q1 = quantile_sorted(values, 0.25);
  s.median = quantile_sorted(values, 0.5);
  s.q3 = quantile_sorted(values, 0.75);
  s.max = values.back();
  return s;
}

std::vector<FiveNumberSummary> pet_stats(std::span<const ConcreteScenario> scenarios,
                                         const std::vector<std::string>& include_types) {
  std::map<std::string, std::vector<double>> groups;
  for (const auto& t : include_types) groups[t];
  for (const auto& s : scenarios) {
    if (s.core.pet.pet) groups[s.core.functional_type.key()].push_back(*s.core.pet.pet);
  }
  std::vector<FiveNumberSummary> out;
  for (auto& [type, values] : groups) out.push_back(five_number_summary(type, std::move(values)));
  return out;
}

void write_pet_stats(std::ostream& out, std::span<const FiveNumberSummary> rows) {
  csv::Writer w(out);
  w.row({"type", "count", "min", "q1", "median", "q3", "max"});
  for (const auto& r : rows) {
    w.field(r.type).field(r.count);
    if (r.count == 0) {
      for (int i = 0; i < 5; ++i) w.empty_field();
    } else {
      w.field(r.min).field(r.q1).field(r.median).field(r.q3).field(r.max);
    }
    w.end_row();
  }
}

}  // namespace junction
