#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "junction/geometry.hpp"
#include "junction/maneuvers.hpp"
#include "junction/params.hpp"
#include "junction/traffic_space.hpp"
#include "junction/trajdata.hpp"

namespace junction {

inline constexpr double kUnconstrained = std::numeric_limits<double>::infinity();

enum class Integrator { euler, heun };
std::string_view to_string(Integrator i);
std::optional<Integrator> parse_integrator(std::string_view text);

struct SimConfig {
  double dt = 0.02;
  double duration = 60.0;
  std::uint64_t seed = 1;
  Integrator integrator = Integrator::euler;
  double frame_rate = 25.0;  // rate of the input data and of the log

  // dt > 0, dt <= half the frame period, and the frame period a whole number of steps.
  void validate() const;
  int substeps() const;
};

// ---------------------------------------------------------------------------
// Routes

struct YieldPoint {
  double stop_s = 0.0;      // front bumper stops here
  double conflict_s = 0.0;  // conflict point along the route
  double zone_in = 0.0;     // shared stretch along the route
  double zone_out = 0.0;
  std::string own_lane;
  std::string other_lane;
  double other_lane_s = 0.0;  // conflict point along the other lane
  double other_in = 0.0;      // shared stretch along the other lane
  double other_out = 0.0;
  bool must_yield = false;    // false: conflict is only watched for occupancy
  bool merge = false;
};

struct CrosswalkSpan {
  std::size_t crosswalk = 0;
  double s_in = 0.0;
  double s_out = 0.0;
};

// Reference path made of consecutive lane centerlines (or a free polyline), with the
// per-arc-length data the vehicle model needs.
class Route {
 public:
  Route() = default;
  static Route from_lanes(const TrafficSpace& space, const std::vector<std::string>& lane_ids, AgentKind kind);
  static Route from_polyline(Polyline path, double width = 3.5, double speed_limit = kUnconstrained);

  const Polyline& path() const { return path_; }
  double length() const { return path_.length(); }
  const std::vector<std::string>& lanes() const { return lanes_; }
  // Arc length where lane `id` starts on this route, if it is part of it.
  std::optional<double> lane_offset(const std::string& id) const;
  double speed_limit_at(double s) const;
  double width_at(double s) const;
  // Curvature from a 1 m lookup table.
  double curvature_at(double s) const;
  const std::vector<YieldPoint>& yields() const { return yields_; }
  const std::vector<CrosswalkSpan>& crosswalks() const { return crosswalks_; }

 private:
  void build_tables();

  Polyline path_;
  std::vector<std::string> lanes_;
  std::vector<double> lane_start_;
  std::vector<double> speed_limits_;
  std::vector<double> widths_;
  std::vector<double> curvature_;
  std::vector<YieldPoint> yields_;
  std::vector<CrosswalkSpan> crosswalks_;
};

// ---------------------------------------------------------------------------
// Agents and world

enum class AgentMode { replayed, agent };
std::string_view to_string(AgentMode m);

struct AgentState {
  Vec2 position;
  double heading = 0.0;
  double speed = 0.0;
  Vec2 velocity;           // pedestrians integrate the full vector
  double steering = 0.0;
  double s = 0.0;          // progress along the route
  double lateral = 0.0;    // commanded in-lane offset (spring-damper state)
  double lateral_rate = 0.0;
  double preferred_offset = 0.0;
  AgentMode mode = AgentMode::agent;
};

// Control supplied from outside the model for one step (e.g. an ego policy).
struct ExternalControl {
  enum class Kind { actuation, setpoint };
  Kind kind = Kind::actuation;
  double accel = 0.0;
  double steering = 0.0;
  AgentState setpoint;  // state at the end of the step
};

struct Agent {
  int id = 0;
  AgentKind kind = AgentKind::car;
  double length = 4.5;
  double width = 1.8;
  AgentState state;
  Route route;
  // Seconds; the agent joins the world at the first step with time >= spawn_time.
  double spawn_time = 0.0;
  bool active = false;
  bool finished = false;
  // Followed verbatim while mode == replayed.
  std::optional<Track> recorded;
  // Overrides the world parameters for this agent when set.
  std::optional<VehicleParams> vehicle_params;
  std::optional<PedestrianParams> pedestrian_params;
  // Committed yield decisions, index into route.yields().
  std::vector<bool> committed;
  std::optional<ExternalControl> external;
  // Activation waits until no active agent is near the route start.
  bool wait_for_clear_spawn = false;
};

struct ForceTerms {
  bool repulsion = true;
  bool curve = true;
  bool priority = true;
  bool vru = true;
  bool lateral = true;
};

// Per-agent breakdown of the last evaluation, kept for diagnostics.
struct ForceBreakdown {
  double drive = 0.0;
  double leader = 0.0;
  double vru = 0.0;
  double stop = 0.0;
  double v_desired = 0.0;
  double v_curve = kUnconstrained;
  double v_yield = kUnconstrained;
  double lateral_target = 0.0;
  Vec2 ped_drive;
  Vec2 ped_social;
  Vec2 ped_wall;
  bool coincident = false;

  std::string describe() const;
};

struct CollisionEvent {
  long long step = 0;
  double time = 0.0;
  int agent_a = 0;
  int agent_b = 0;
};

struct World {
  const TrafficSpace* space = nullptr;
  ModelParams params = ModelParams::defaults();
  ForceTerms terms;
  std::vector<Agent> agents;
  std::vector<Polygon> obstacles;  // static boundaries for pedestrians
  double start_time = 0.0;
  long long step_index = 0;
  std::vector<CollisionEvent> collisions;
  std::set<std::pair<int, int>> contacts;  // pairs currently overlapping

  double time(double dt) const { return start_time + static_cast<double>(step_index) * dt; }
  Agent* find(int id);
  const Agent* find(int id) const;
};

// ---------------------------------------------------------------------------
// Force model

struct PedestrianForce {
  Vec2 force;
  ForceBreakdown terms;
};

struct Neighbor {
  Vec2 position;
  Vec2 velocity;
  double radius = 0.0;
  std::optional<Footprint> footprint;  // vehicles: repulsion measured to the footprint
};

PedestrianForce pedestrian_force(const AgentState& self, const PedestrianParams& p, Vec2 goal,
                                 const std::vector<Neighbor>& neighbors, const std::vector<Polygon>& obstacles);

struct VehicleDemand {
  double accel = 0.0;
  double lateral = 0.0;  // target in-lane offset
  ForceBreakdown terms;
};

const VehicleParams& vehicle_params_of(const World& world, const Agent& agent);
const PedestrianParams& pedestrian_params_of(const World& world, const Agent& agent);

// Longitudinal and lateral demand of a vehicle agent within the frozen world state.
// `commit` starts as the agent's commit flags and receives the updated ones.
VehicleDemand vehicle_force(const World& world, std::size_t index, std::vector<bool>& commit);

// Distance from the front bumper to the point where the priority rule requires a stop;
// nullopt when no yield is required.
std::optional<double> priority_stop_distance(const World& world, std::size_t index, std::vector<bool>& commit);
// Speed profile that stops at the yield line: sqrt(2 b_comf d), or kUnconstrained.
double priority_yield(const World& world, std::size_t index, std::vector<bool>& commit);

// Time to cover `distance` starting at speed v, accelerating at `accel` up to v_max.
double time_to_cover(double distance, double v, double accel, double v_max);

// Pure-pursuit steering toward the route shifted by `lateral` at the lookahead point.
double pure_pursuit(const AgentState& state, const Route& route, double lateral, const VehicleParams& p);

// One kinematic single-track step with accel and steering held over dt.
AgentState integrate_single_track(const AgentState& state, double accel, double steering, double wheelbase, double dt,
                                  Integrator integrator);

// ---------------------------------------------------------------------------
// Stepping and logging

struct LogRow {
  long long frame = 0;
  int agent_id = 0;
  AgentKind kind = AgentKind::car;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double v = 0.0;
  double delta = 0.0;
  AgentMode mode = AgentMode::agent;

  bool operator==(const LogRow&) const = default;
};

struct SimLog {
  double frame_rate = 25.0;
  long long first_frame = 0;
  long long frame_count = 0;
  std::vector<LogRow> rows;  // ordered by frame, then agent id
  std::vector<CollisionEvent> collisions;
};

// Advances every active agent by one dt from the frozen state (synchronous update).
// Throws RuntimeAbort when a state becomes non-finite.
void step(World& world, const SimConfig& cfg);
// Activates agents whose spawn time has come (replayed agents: inside their recorded lifetime).
void activate_agents(World& world, const SimConfig& cfg);
// Recorded state at time t (exact samples at whole frames, linear in between); nullopt
// outside the track lifetime. Fields not carried by the track are copied from `prev`.
std::optional<AgentState> state_from_track(const Track& track, double t, double frame_rate, const AgentState& prev = {});
// Runs for cfg.duration, logging every frame period.
SimLog run_scenario(World world, const SimConfig& cfg);

void append_log_rows(const World& world, long long frame, std::vector<LogRow>& rows);
void write_log(std::ostream& out, const SimLog& log);
SimLog read_log(std::istream& in, double frame_rate = 25.0);
// Log rows regrouped into tracks (one per agent), kinematics filled from the log.
Recording log_to_recording(const SimLog& log, int recording_id = 0, const std::string& space_id = {});

// ---------------------------------------------------------------------------
// World construction

// Agent seeded from the first recorded sample, routed along the lanes that connect its
// branch label; falls back to the recorded path when no lane route exists.
struct SeedOptions {
  bool use_recorded_path_fallback = true;
};
std::optional<Agent> agent_from_track(const Track& track, const std::optional<BranchLabel>& label,
                                      const TrafficSpace& space, double frame_rate, const ModelParams& params,
                                      std::uint64_t seed, const SeedOptions& opt = {});

struct SpawnRoute {
  std::string entry;
  std::string exit;
  AgentKind kind = AgentKind::car;
  double rate = 0.1;  // arrivals per second (Poisson)
};

struct SpawnSpec {
  std::vector<SpawnRoute> routes;
  double duration = 60.0;
  std::uint64_t seed = 1;
};

SpawnSpec parse_spawn_spec(const std::string& json_text);
World build_world_from_spawn(const TrafficSpace& space, const SpawnSpec& spec, const ModelParams& params);

// Preferred in-lane offset drawn from N(0, sigma), clipped to the lane.
double draw_preferred_offset(std::uint64_t seed, int agent_id, double sigma, double max_abs);

}  // namespace junction
