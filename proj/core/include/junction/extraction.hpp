#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "junction/geometry.hpp"
#include "junction/maneuvers.hpp"
#include "junction/traffic_space.hpp"
#include "junction/trajdata.hpp"

namespace junction {

enum class ScenarioCategory { v2v, v2p, v2b };
std::string_view to_string(ScenarioCategory c);
std::optional<ScenarioCategory> parse_category(std::string_view text);
// Ego must be a car; nullopt for pairings outside the three categories.
std::optional<ScenarioCategory> categorize(AgentKind ego, AgentKind challenger);

struct FunctionalType {
  std::string name;
  ScenarioCategory category = ScenarioCategory::v2v;

  std::string key() const { return std::string(to_string(category)) + ":" + name; }
  bool operator==(const FunctionalType&) const = default;
};

// ---------------------------------------------------------------------------
// Footprints and paths

struct FootprintConfig {
  double pedestrian_radius = 0.3;
  // Used when a track carries no dimensions.
  double default_vehicle_length = 4.5;
  double default_vehicle_width = 1.8;
  double default_bicycle_length = 1.8;
  double default_bicycle_width = 0.6;
};

// Pose interpolated linearly between frames; t in seconds (frame / frame_rate).
struct Pose {
  Vec2 position;
  double heading = 0.0;
};
Pose pose_at_time(const Track& track, double t, double frame_rate);
Footprint footprint_of(const Track& track, const Pose& pose, const FootprintConfig& cfg);
// Buffer half width for a track's swept path.
double path_half_width(const Track& track, const FootprintConfig& cfg);
Polyline path_of(const Track& track, double min_spacing = 0.5);

// ---------------------------------------------------------------------------
// Region of interest

// Frame -> sorted ids of other tracks within `radius` (closed ball) of the ego at that frame.
std::map<long long, std::vector<int>> roi_neighbors(const Track& ego, std::span<const Track> others, double radius);
std::optional<long long> first_roi_contact(const Track& a, const Track& b, double radius);

// ---------------------------------------------------------------------------
// Conflict areas and PET

struct ConflictArea {
  Polygon polygon;
  double a_path_s = 0.0;
  double b_path_s = 0.0;

  bool operator==(const ConflictArea&) const = default;
};

// Intersection of the two buffered paths, one area per connected component, largest first.
// Throws DataError for zero-length paths.
std::vector<ConflictArea> find_conflict_areas(const Polyline& path_a, double half_width_a, const Polyline& path_b,
                                              double half_width_b);
std::optional<ConflictArea> find_conflict_area(const Polyline& path_a, double half_width_a, const Polyline& path_b,
                                               double half_width_b);
// Cuts areas longer than max_extent along path_a into slices, so that agents following each
// other along a shared stretch are not reported as occupying it simultaneously.
std::vector<ConflictArea> slice_along(const ConflictArea& area, const Polyline& path_a, const Polyline& path_b,
                                      double max_extent);

struct Occupancy {
  double enter_time = 0.0;
  double exit_time = 0.0;
  long long first_frame = 0;
  long long last_frame = 0;

  bool operator==(const Occupancy&) const = default;
};
// First and last time the track's footprint overlaps the polygon; sample-level detection
// refined between frames by bisection on the interpolated pose.
std::optional<Occupancy> occupancy(const Track& track, std::span<const Vec2> polygon, double frame_rate,
                                   const FootprintConfig& cfg);

struct PETResult {
  std::optional<double> pet;
  int first_agent = -1;
  double exit_time = 0.0;   // first agent leaves the area
  double entry_time = 0.0;  // second agent enters the area
  bool collision = false;   // occupancy intervals overlap; pet is 0
  std::string reason;       // why pet is absent
  std::optional<Occupancy> a_occupancy;
  std::optional<Occupancy> b_occupancy;

  long long last_occupancy_frame() const;
  bool operator==(const PETResult&) const = default;
};

PETResult compute_pet(const Track& a, const Track& b, const ConflictArea& area, double frame_rate,
                      const FootprintConfig& cfg = {});
// Minimum over several areas; absent only when absent for all of them.
PETResult compute_min_pet(const Track& a, const Track& b, std::span<const ConflictArea> areas, double frame_rate,
                          const FootprintConfig& cfg = {});

// ---------------------------------------------------------------------------
// Functional taxonomy

enum class ApproachRelation { same, oncoming, from_left, from_right };
std::string_view to_string(ApproachRelation r);
// Relation of the challenger's entry branch as seen from the ego's entry branch.
ApproachRelation approach_relation(const std::string& ego_entry, const std::string& challenger_entry);

struct TaxonomyRule {
  std::set<ManeuverType> ego;         // empty matches any
  std::set<ManeuverType> challenger;  // empty matches any
  std::set<ApproachRelation> relations;
  std::string name;
};

struct Taxonomy {
  std::vector<TaxonomyRule> v2v_rules;
  std::string unclassified = "unclassified";
  std::string cross = "cross";
  std::string not_cross = "not-cross";

  // Ten vehicle-vehicle types; also used for vehicle-bicycle pairs.
  static Taxonomy defaults();
  // Every type name reachable for the category, in a stable order.
  std::vector<std::string> type_names(ScenarioCategory c) const;
};

struct IntersectingScenario {
  int ego_track_id = 0;
  int challenger_track_id = 0;
  ScenarioCategory category = ScenarioCategory::v2v;
  FunctionalType functional_type;
  PETResult pet;
  long long window_start = 0;
  long long window_end = 0;
  std::optional<ConflictArea> conflict;  // area that produced the minimum pet
  bool critical = false;
  double ego_distance_to_conflict = 0.0;         // along the ego path from its window-start position
  double challenger_distance_to_conflict = 0.0;  // likewise for the challenger

  bool operator==(const IntersectingScenario&) const = default;
};

FunctionalType classify_functional_type(const IntersectingScenario& scn, const LabelTable& labels,
                                        const Taxonomy& taxonomy, bool has_conflict_area);

struct TailorMargins {
  double lead_s = 1.0;
  double tail_s = 1.0;
};

// Window = [first ROI contact - lead, last conflict occupancy + tail], clamped to both lifetimes.
IntersectingScenario tailor_scenario(IntersectingScenario scn, const Track& ego, const Track& challenger,
                                     double roi_radius, const TailorMargins& margins, double frame_rate);

struct ConcreteScenario {
  IntersectingScenario core;
  std::vector<Track> participants;  // clipped to the core window, ordered by track id
  std::map<int, BranchLabel> labels;
  int recording_id = 0;
  std::string traffic_space_id;
  double frame_rate = 25.0;

  const Track* participant(int track_id) const;
  bool operator==(const ConcreteScenario&) const = default;
};

Track clip_track(const Track& track, long long first_frame, long long last_frame);

// Participants: every track within the ROI of a core motor vehicle at some frame of the window.
ConcreteScenario compose_complex_scenario(const IntersectingScenario& core, const Recording& recording, double roi_radius,
                                          const LabelTable* labels = nullptr);

struct ExtractionConfig {
  double roi_radius = 15.0;
  double pet_threshold = 6.5;
  double critical_pet = 1.5;
  TailorMargins margins;
  FootprintConfig footprint;
  Taxonomy taxonomy = Taxonomy::defaults();
  double path_spacing = 0.5;
  double max_area_extent = 5.0;
  unsigned threads = 1;

  void validate() const;
};

struct Candidate {
  int ego_track_id = 0;
  int challenger_track_id = 0;
  ScenarioCategory category = ScenarioCategory::v2v;
  FunctionalType functional_type;
  PETResult pet;
  bool has_conflict_area = false;
  bool retained = false;
};

struct ExtractionResult {
  std::vector<ConcreteScenario> scenarios;  // ordered by (ego, challenger)
  std::vector<Candidate> candidates;        // every ROI pair examined, same order
};

ExtractionResult extract_all(const Recording& recording, const TrafficSpace& space, const LabelTable& labels,
                             const ExtractionConfig& cfg);

void write_candidates(std::ostream& out, std::span<const Candidate> candidates);

// ---------------------------------------------------------------------------
// PET statistics

struct FiveNumberSummary {
  std::string type;
  std::size_t count = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

// Linear interpolation between order statistics at rank p * (n - 1).
double quantile_sorted(std::span<const double> sorted, double p);
FiveNumberSummary five_number_summary(std::string type, std::vector<double> values);

// Groups by FunctionalType::key(); `include_types` adds rows (count 0 when empty) for types
// that did not occur.
std::vector<FiveNumberSummary> pet_stats(std::span<const ConcreteScenario> scenarios,
                                         const std::vector<std::string>& include_types = {});
void write_pet_stats(std::ostream& out, std::span<const FiveNumberSummary> rows);

}  // namespace junction
