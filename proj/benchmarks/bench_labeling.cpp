#include <benchmark/benchmark.h>

#include "junction/maneuvers.hpp"
#include "junction/synthetic.hpp"

using namespace junction;

namespace {

void BM_LabelRecording(benchmark::State& state) {
  const TrafficSpace space = make_intersection();
  const Recording rec = make_planted_recording(space).recording;
  const LabelingConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(label_recording(rec, space, cfg));
  state.counters["tracks"] = static_cast<double>(rec.tracks.size());
}
BENCHMARK(BM_LabelRecording);

}  // namespace

BENCHMARK_MAIN();
