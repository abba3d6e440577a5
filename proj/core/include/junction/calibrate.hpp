#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "junction/maneuvers.hpp"
#include "junction/params.hpp"
#include "junction/simcore.hpp"

namespace junction {

struct ParamGene {
  std::string name;  // ModelParams name, e.g. "car.v0"
  double lower = 0.0;
  double upper = 1.0;
};

struct ParamSpec {
  std::vector<ParamGene> genes;

  void validate() const;
  std::size_t size() const { return genes.size(); }
  // "car.v0:8:18,car.T_gap:0.5:3"
  static ParamSpec parse(const std::string& text);
  ModelParams apply(ModelParams base, std::span<const double> x) const;
  std::vector<double> extract(const ModelParams& params) const;
};

struct GAConfig {
  std::size_t population = 50;
  int generations = 100;
  std::size_t tournament = 3;
  double crossover_rate = 0.9;
  double mutation_rate = 0.1;
  double mutation_sigma = 0.1;  // fraction of the gene range
  std::size_t elitism = 2;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  void validate() const;
};

struct GAHistoryRow {
  int generation = 0;
  double best = 0.0;  // best fitness seen so far
  double mean = 0.0;  // mean over the generation's population

  bool operator==(const GAHistoryRow&) const = default;
};

struct GAResult {
  std::vector<double> best;
  double best_fitness = 0.0;
  std::vector<GAHistoryRow> history;  // generation 0 is the initial population
  std::size_t evaluations = 0;
};

using FitnessFn = std::function<double(std::span<const double>)>;
// Called with every population before it is evaluated.
using GAObserver = std::function<void(int generation, const std::vector<std::vector<double>>& population)>;

// Generational GA: uniform init, tournament selection, uniform crossover, Gaussian mutation
// clipped to bounds, elitism. Fitness is minimized; evaluations may run on cfg.threads
// threads and are reduced in individual order, so results depend on the seed only.
// `initial` replaces the random initial population when non-empty.
GAResult run_ga(const ParamSpec& spec, const GAConfig& cfg, const FitnessFn& fitness,
                const std::vector<std::vector<double>>& initial = {}, const GAObserver& observer = {});

void write_ga_history(std::ostream& out, std::span<const GAHistoryRow> history);
// Full ModelParams JSON with the best genes applied to `base`.
std::string best_params_json(const ParamSpec& spec, const GAResult& result, const ModelParams& base);

// ---------------------------------------------------------------------------
// Fitness against a recording

struct FitnessConfig {
  double collision_weight = 10.0;
  // Agents follow their recorded samples instead of the model; the error is then zero.
  bool replay_recorded = false;
  std::uint64_t seed = 1;
};

struct FitnessReport {
  double fitness = 0.0;
  double mean_error = 0.0;
  std::size_t collisions = 0;
  std::size_t agents_total = 0;
  std::size_t agents_evaluated = 0;
  std::vector<int> excluded;  // unroutable, or no frame shared with the simulation
  double excluded_fraction = 0.0;
  SimLog log;
};

// Simulates every recorded agent from its first sample along its labeled route and compares
// positions at matched frames.
FitnessReport evaluate_fitness(const ModelParams& params, const Recording& recording, const TrafficSpace& space,
                               const LabelTable& labels, const SimConfig& sim, const FitnessConfig& cfg = {});

struct PositionError {
  double mean = 0.0;  // mean over agents of the per-agent mean error
  std::vector<int> agents;
  std::vector<int> unmatched;
};
// Mean Euclidean error between logged and recorded positions over frames present in both.
PositionError mean_position_error(const SimLog& log, const Recording& recording, const std::set<int>& agent_ids);

}  // namespace junction
