#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "junction/extraction.hpp"
#include "junction/scenariodb.hpp"
#include "junction/simcore.hpp"

namespace junction {

struct DissimilarityConfig {
  double position_weight = 1.0;
  double heading_weight = 0.0;
  double speed_weight = 0.0;
  double threshold = 1.5;

  void validate() const;
};

// sqrt(w_p |dp|^2 + w_h dh^2 + w_v dv^2), heading difference wrapped to (-pi, pi].
double dissimilarity(const AgentState& ego, const TrackSample& recorded, const DissimilarityConfig& cfg);

// ---------------------------------------------------------------------------
// Ego policies

struct PolicyInput {
  long long step = 0;
  double time = 0.0;  // start of the step
  double dt = 0.0;
  double frame_rate = 25.0;
  std::size_t ego_index = 0;
  const World* world = nullptr;
  const Track* recorded_ego = nullptr;  // ground truth of the substituted vehicle
};

class EgoPolicy {
 public:
  virtual ~EgoPolicy() = default;
  virtual std::string id() const = 0;
  // Called once per run before the first step; may adjust the ego (e.g. its parameters).
  virtual void reset(Agent& ego) { (void)ego; }
  virtual ExternalControl control(const PolicyInput& in) = 0;
};

using PolicyFactory = std::function<std::unique_ptr<EgoPolicy>()>;

// Drives the ego exactly along its recording.
class RecordedEgoPolicy : public EgoPolicy {
 public:
  std::string id() const override { return "recorded"; }
  ExternalControl control(const PolicyInput& in) override;
};

// Recorded motion shifted to the left by rate * max(0, t - start) metres, with t counted
// from the ego's first sample.
class LateralRampPolicy : public EgoPolicy {
 public:
  LateralRampPolicy(double start, double rate) : start_(start), rate_(rate) {}
  std::string id() const override { return "lateral-ramp"; }
  void reset(Agent& ego) override;
  ExternalControl control(const PolicyInput& in) override;

 private:
  double start_;
  double rate_;
  double origin_ = 0.0;
};

// The simulation vehicle model with its own parameter set, actuating the ego.
class BaselinePolicy : public EgoPolicy {
 public:
  explicit BaselinePolicy(VehicleParams params) : params_(params) {}
  static VehicleParams default_params();
  std::string id() const override { return "baseline"; }
  void reset(Agent& ego) override;
  ExternalControl control(const PolicyInput& in) override;

 private:
  VehicleParams params_;
  std::vector<bool> commit_;
};

// "recorded", "baseline", or "ramp:<start>:<rate>". Throws ConfigError.
PolicyFactory make_policy_factory(const std::string& spec);

// ---------------------------------------------------------------------------
// Sessions

enum class SessionMode { replay, agent };
std::string_view to_string(SessionMode m);

struct ParamOverride {
  std::string name;  // ModelParams name; "*.field" applies to every vehicle kind
  double value = 0.0;
  bool scale = false;  // multiply instead of replace
};

struct Variation {
  std::string name;
  std::vector<ParamOverride> overrides;
};

// n seeded variations toward more aggressive traffic: shorter accepted gaps and headways,
// higher desired speeds.
std::vector<Variation> aggressive_variations(std::size_t n, std::uint64_t seed);
ModelParams apply_variation(ModelParams params, const Variation& v);

struct ReplayConfig {
  SimConfig sim;
  DissimilarityConfig dissimilarity;
  ModelParams params = ModelParams::defaults();
  FootprintConfig footprint;
  double critical_pet = 1.5;  // criticality flag used by the false-positive audit
  double audit_rewind = 2.0;  // seconds
  std::uint64_t seed = 1;
  unsigned threads = 1;

  void validate() const;
};

struct Trigger {
  long long frame = 0;
  double value = 0.0;
  bool forced = false;
};

struct SessionRow {
  LogRow row;
  std::optional<double> dissimilarity;
  SessionMode mode = SessionMode::replay;
};

struct ReplaySession {
  int ego_id = 0;
  std::string policy_id;
  SessionMode mode = SessionMode::replay;
  std::optional<Trigger> trigger;
  std::vector<std::pair<long long, double>> trace;  // (frame, dissimilarity)
  SimLog log;
  std::vector<SessionRow> rows;
  std::string end_reason;
  std::optional<std::string> variation;
  std::vector<std::string> warnings;
  // Filled by summarize_session / false_positive_audit.
  std::optional<double> min_pet;
  int min_pet_agent = -1;
  bool possible_false_positive = false;
};

struct RunOptions {
  // Switch to agent mode at this frame regardless of the dissimilarity.
  std::optional<long long> forced_switch_frame;
  // Parameters used by the agents once they are switched.
  std::optional<Variation> variation;
};

// Requires the ego to be a car participant of the scenario. Throws RuntimeAbort when the
// policy produces a non-finite output.
ReplaySession run_adaptive(const ConcreteScenario& scenario, int ego_id, const TrafficSpace& space, EgoPolicy& policy,
                           const ReplayConfig& cfg, const RunOptions& opt = {});

// Re-runs from (trigger - rewind) with agents switched there under each variation. An empty
// variation list yields a single run without parameter changes. Runs are independent and
// may execute in parallel; results come back in variation order.
std::vector<ReplaySession> rewind_and_vary(const ConcreteScenario& scenario, const ReplaySession& session,
                                           const TrafficSpace& space, const PolicyFactory& policy, double rewind,
                                           const std::vector<Variation>& variations, const ReplayConfig& cfg);

// Minimum PET between the ego and every other agent in the session log.
void summarize_session(ReplaySession& session, const ConcreteScenario& scenario, const ReplayConfig& cfg);

// Rewinds with zero parameter change; when the recorded scenario was critical and no
// criticality (PET <= critical_pet or a collision) reappears, flags a possible false positive.
void false_positive_audit(ReplaySession& session, const ConcreteScenario& scenario, const TrafficSpace& space,
                          const PolicyFactory& policy, const ReplayConfig& cfg);

// Log superset: simulation columns plus dissimilarity and session mode.
void write_session_csv(std::ostream& out, const ReplaySession& session);
std::string session_summary_json(const ReplaySession& session, const std::string& config_hash = {},
                                 const std::string& version = {});

// Session log as a concrete scenario (source = synthetic).
ScenarioRecord session_to_record(const ReplaySession& session, const ConcreteScenario& scenario,
                                 const ReplayConfig& cfg, const std::string& pipeline_version,
                                 const std::string& config_hash);

}  // namespace junction
