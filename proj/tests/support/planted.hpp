#pragma once

#include "junction/extraction.hpp"
#include "junction/preprocess.hpp"
#include "junction/traffic_space.hpp"
#include "oracles.hpp"

namespace fixture {

struct Planted {
  junction::Recording recording;
  junction::TrafficSpace space;
  junction::LabelTable labels;
  junction::ExtractionResult extraction;
};

// The planted fixture, filtered, labelled and extracted with default settings. Built once.
inline const Planted& planted() {
  static const Planted p = [] {
    using namespace junction;
    Planted x;
    const auto dir = oracle::fixture_dir();
    x.recording = load_recording(
        {dir / "planted_recordingMeta.csv", dir / "planted_tracksMeta.csv", dir / "planted_tracks.csv"},
        ColumnMap::identity());
    x.recording = filter_tracks(x.recording, FilterRules::defaults(x.recording.frame_rate)).first;
    x.space = load_traffic_space(dir / "map.json");
    x.labels = label_recording(x.recording, x.space, LabelingConfig{});
    x.extraction = extract_all(x.recording, x.space, x.labels, ExtractionConfig{});
    return x;
  }();
  return p;
}

}  // namespace fixture
