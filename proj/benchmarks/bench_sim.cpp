#include <benchmark/benchmark.h>

#include "junction/simcore.hpp"
#include "junction/synthetic.hpp"

using namespace junction;

namespace {

// One synchronous step with a populated intersection; range(0) is the number of spawn routes used.
void BM_SimStep(benchmark::State& state) {
  const TrafficSpace space = make_intersection();
  SpawnSpec spec;
  spec.duration = 30.0;
  spec.routes = {{"S", "N", AgentKind::car, 0.2}, {"N", "S", AgentKind::car, 0.2}, {"E", "W", AgentKind::car, 0.1},
                 {"W", "N", AgentKind::car, 0.1}, {"NE", "NW", AgentKind::pedestrian, 0.1}};
  spec.routes.resize(static_cast<std::size_t>(state.range(0)));
  World w = build_world_from_spawn(space, spec, ModelParams::defaults());
  const SimConfig cfg;
  // Advance into a busy state first.
  for (int k = 0; k < 750; ++k) {
    activate_agents(w, cfg);
    step(w, cfg);
  }
  std::size_t active = 0;
  for (const auto& a : w.agents) active += a.active && !a.finished;
  for (auto _ : state) {
    World copy = w;
    step(copy, cfg);
    benchmark::DoNotOptimize(copy.agents.data());
  }
  state.counters["agents"] = static_cast<double>(active);
}
BENCHMARK(BM_SimStep)->Arg(1)->Arg(3)->Arg(5);

void BM_SingleTrack(benchmark::State& state) {
  AgentState s;
  s.speed = 10.0;
  for (auto _ : state) {
    s = integrate_single_track(s, 0.0, 0.05, 2.8, 0.02, Integrator::heun);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_SingleTrack);

}  // namespace
