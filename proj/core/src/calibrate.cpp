#include "junction/calibrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "junction/csv.hpp"
#include "junction/scenariodb.hpp"

namespace junction {

void ParamSpec::validate() const {
  if (genes.empty()) throw ConfigError("calibrate.params: at least one parameter is required");
  const auto known = ModelParams::names();
  for (const auto& g : genes) {
    if (std::find(known.begin(), known.end(), g.name) == known.end()) {
      throw ConfigError("calibrate.params: unknown parameter '" + g.name + "'");
    }
    if (!(g.lower < g.upper) || !std::isfinite(g.lower) || !std::isfinite(g.upper)) {
      throw ConfigError("calibrate.params: " + g.name + " needs lower < upper");
    }
  }
}

ParamSpec ParamSpec::parse(const std::string& text) {
  ParamSpec spec;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const auto a = item.find(':');
    const auto b = a == std::string::npos ? a : item.find(':', a + 1);
    if (b == std::string::npos) throw ConfigError("calibrate.params: expected name:lower:upper, got '" + item + "'");
    ParamGene g;
    g.name = item.substr(0, a);
    try {
      g.lower = csv::parse_double(item.substr(a + 1, b - a - 1), g.name + " lower bound");
      g.upper = csv::parse_double(item.substr(b + 1), g.name + " upper bound");
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("calibrate.params: ") + e.what());
    }
    spec.genes.push_back(std::move(g));
  }
  spec.validate();
  return spec;
}

ModelParams ParamSpec::apply(ModelParams base, std::span<const double> x) const {
  if (x.size() != genes.size()) throw ConfigError("parameter vector size does not match the parameter list");
  for (std::size_t i = 0; i < genes.size(); ++i) base.set(genes[i].name, x[i]);
  return base;
}

std::vector<double> ParamSpec::extract(const ModelParams& params) const {
  std::vector<double> x;
  for (const auto& g : genes) x.push_back(params.get(g.name));
  return x;
}

void GAConfig::validate() const {
  if (population < 2) throw ConfigError("ga.population: must be >= 2");
  if (generations < 0) throw ConfigError("ga.generations: must be >= 0");
  if (tournament < 1) throw ConfigError("ga.tournament: must be >= 1");
  auto rate = [](double v, const char* key) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(key) + ": must be in [0, 1]");
  };
  rate(crossover_rate, "ga.crossover_rate");
  rate(mutation_rate, "ga.mutation_rate");
  if (!(mutation_sigma >= 0.0)) throw ConfigError("ga.mutation_sigma: must be >= 0");
  if (elitism >= population) throw ConfigError("ga.elitism: must be smaller than ga.population");
  if (threads < 1) throw ConfigError("ga.threads: must be >= 1");
}

namespace {

double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - unit_uniform(rng());
  const double u2 = unit_uniform(rng());
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(unit_uniform(rng()) * static_cast<double>(n)));
}

std::vector<double> evaluate_all(const std::vector<std::vector<double>>& pop, const FitnessFn& fitness, unsigned threads) {
  std::vector<double> out(pop.size());
  auto eval = [&](std::size_t i) {
    const double f = fitness(pop[i]);
    out[i] = std::isnan(f) ? std::numeric_limits<double>::infinity() : f;
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(pop.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < pop.size(); ++i) eval(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < pop.size(); i = next++) eval(i);
        } catch (...) {
          errors[w] = std::current_exception();
          next = pop.size();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace

GAResult run_ga(const ParamSpec& spec, const GAConfig& cfg, const FitnessFn& fitness,
                const std::vector<std::vector<double>>& initial, const GAObserver& observer) {
  spec.validate();
  cfg.validate();
  const std::size_t n = cfg.population;
  const std::size_t d = spec.size();
  std::mt19937_64 rng(cfg.seed);

  std::vector<std::vector<double>> pop;
  if (!initial.empty()) {
    if (initial.size() != n) throw ConfigError("initial population size does not match ga.population");
    pop = initial;
    for (auto& x : pop) {
      if (x.size() != d) throw ConfigError("initial individual has the wrong dimension");
      for (std::size_t k = 0; k < d; ++k) x[k] = std::clamp(x[k], spec.genes[k].lower, spec.genes[k].upper);
    }
  } else {
    pop.assign(n, std::vector<double>(d));
    for (auto& x : pop) {
      for (std::size_t k = 0; k < d; ++k) {
        const auto& g = spec.genes[k];
        x[k] = g.lower + (g.upper - g.lower) * unit_uniform(rng());
      }
    }
  }

  GAResult result;
  result.best_fitness = std::numeric_limits<double>::infinity();
  for (int gen = 0;; ++gen) {
    if (observer) observer(gen, pop);
    const auto fit = evaluate_all(pop, fitness, cfg.threads);
    result.evaluations += pop.size();

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fit[a] < fit[b]; });
    if (fit[order[0]] < result.best_fitness || result.best.empty()) {
      result.best_fitness = fit[order[0]];
      result.best = pop[order[0]];
    }
    double sum = 0.0;
    for (double f : fit) sum += f;
    result.history.push_back({gen, result.best_fitness, sum / static_cast<double>(n)});
    if (gen == cfg.generations) break;

    auto tournament = [&]() {
      std::size_t best = uniform_index(rng, n);
      for (std::size_t k = 1; k < cfg.tournament; ++k) {
        const std::size_t c = uniform_index(rng, n);
        if (fit[c] < fit[best] || (fit[c] == fit[best] && c < best)) best = c;
      }
      return best;
    };

    std::vector<std::vector<double>> next;
    next.reserve(n);
    for (std::size_t e = 0; e < cfg.elitism; ++e) next.push_back(pop[order[e]]);
    while (next.size() < n) {
      const auto& pa = pop[tournament()];
      const auto& pb = pop[tournament()];
      std::vector<double> child = pa;
      if (unit_uniform(rng()) < cfg.crossover_rate) {
        for (std::size_t k = 0; k < d; ++k) {
          if (unit_uniform(rng()) < 0.5) child[k] = pb[k];
        }
      }
      for (std::size_t k = 0; k < d; ++k) {
        if (unit_uniform(rng()) < cfg.mutation_rate) {
          const auto& g = spec.genes[k];
          child[k] = std::clamp(child[k] + cfg.mutation_sigma * (g.upper - g.lower) * standard_normal(rng), g.lower, g.upper);
        }
      }
      next.push_back(std::move(child));
    }
    pop = std::move(next);
  }
  return result;
}

void write_ga_history(std::ostream& out, std::span<const GAHistoryRow> history) {
  csv::Writer w(out);
  w.row({"generation", "best", "mean"});
  for (const auto& r : history) {
    w.field(r.generation).field(r.best).field(r.mean);
    w.end_row();
  }
}

std::string best_params_json(const ParamSpec& spec, const GAResult& result, const ModelParams& base) {
  return spec.apply(base, result.best).to_json();
}

// ---------------------------------------------------------------------------

PositionError mean_position_error(const SimLog& log, const Recording& recording, const std::set<int>& agent_ids) {
  std::map<int, std::pair<double, std::size_t>> acc;
  for (const auto& row : log.rows) {
    if (!agent_ids.contains(row.agent_id)) continue;
    const Track* t = recording.find(row.agent_id);
    if (!t || !t->has_frame(row.frame)) continue;
    auto& [sum, count] = acc[row.agent_id];
    sum += distance(Vec2{row.x, row.y}, t->at_frame(row.frame).position);
    ++count;
  }
  PositionError out;
  double total = 0.0;
  for (int id : agent_ids) {
    auto it = acc.find(id);
    if (it == acc.end() || it->second.second == 0) {
      out.unmatched.push_back(id);
      continue;
    }
    out.agents.push_back(id);
    total += it->second.first / static_cast<double>(it->second.second);
  }
  out.mean = out.agents.empty() ? 0.0 : total / static_cast<double>(out.agents.size());
  return out;
}

FitnessReport evaluate_fitness(const ModelParams& params, const Recording& recording, const TrafficSpace& space,
                               const LabelTable& labels, const SimConfig& sim, const FitnessConfig& cfg) {
  FitnessReport report;
  World world;
  world.space = &space;
  world.params = params;
  long long first = std::numeric_limits<long long>::max();
  long long last = std::numeric_limits<long long>::min();
  std::set<int> ids;
  SeedOptions opt;
  opt.use_recorded_path_fallback = false;
  for (const auto& t : recording.tracks) {
    if (t.empty()) continue;
    ++report.agents_total;
    const auto* row = labels.find(t.track_id);
    std::optional<BranchLabel> label;
    if (row) label = row->label;
    auto agent = agent_from_track(t, label, space, recording.frame_rate, params, cfg.seed, opt);
    if (!agent) {
      report.excluded.push_back(t.track_id);
      continue;
    }
    if (cfg.replay_recorded) agent->state.mode = AgentMode::replayed;
    ids.insert(t.track_id);
    first = std::min(first, t.initial_frame);
    last = std::max(last, t.final_frame);
    world.agents.push_back(std::move(*agent));
  }
  if (!world.agents.empty()) {
    SimConfig c = sim;
    c.frame_rate = recording.frame_rate;
    c.duration = static_cast<double>(last - first) / recording.frame_rate;
    world.start_time = static_cast<double>(first) / recording.frame_rate;
    report.log = run_scenario(std::move(world), c);
  }
  const auto err = mean_position_error(report.log, recording, ids);
  for (int id : err.unmatched) report.excluded.push_back(id);
  std::sort(report.excluded.begin(), report.excluded.end());
  report.agents_evaluated = err.agents.size();
  report.mean_error = err.mean;
  report.collisions = report.log.collisions.size();
  report.excluded_fraction =
      report.agents_total ? static_cast<double>(report.excluded.size()) / static_cast<double>(report.agents_total) : 0.0;
  report.fitness = report.mean_error + cfg.collision_weight * static_cast<double>(report.collisions);
  return report;
}

}  // namespace junction
