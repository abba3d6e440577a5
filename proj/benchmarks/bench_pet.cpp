#include <benchmark/benchmark.h>

#include <numbers>

#include "junction/extraction.hpp"

using namespace junction;

namespace {

Track crossing(int id, double heading, double t_cross, double fr) {
  Track t;
  t.track_id = id;
  t.kind = AgentKind::car;
  t.length = 4.5;
  t.width = 1.8;
  const Vec2 dir = Vec2::from_angle(heading);
  for (long long f = 0; f < static_cast<long long>(12 * fr); ++f) {
    TrackSample s;
    s.frame = f;
    s.position = dir * (10.0 * (static_cast<double>(f) / fr - t_cross));
    s.heading = heading;
    s.velocity = dir * 10.0;
    t.samples.push_back(s);
  }
  finalize_track(t);
  return t;
}

void BM_ComputePet(benchmark::State& state) {
  const double fr = 25.0;
  const Track a = crossing(1, 0.0, 5.0, fr);
  const Track b = crossing(2, std::numbers::pi / 2, 7.0, fr);
  const auto area = find_conflict_area(path_of(a), 0.9, path_of(b), 0.9);
  for (auto _ : state) benchmark::DoNotOptimize(compute_pet(a, b, *area, fr));
}
BENCHMARK(BM_ComputePet);

void BM_ConflictArea(benchmark::State& state) {
  const Track a = crossing(1, 0.0, 5.0, 25.0);
  const Track b = crossing(2, 1.2, 7.0, 25.0);
  const Polyline pa = path_of(a), pb = path_of(b);
  for (auto _ : state) benchmark::DoNotOptimize(find_conflict_area(pa, 0.9, pb, 0.9));
}
BENCHMARK(BM_ConflictArea);

}  // namespace
