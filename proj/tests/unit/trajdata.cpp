#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "junction/synthetic.hpp"
#include "junction/trajdata.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

using namespace junction;

namespace {

RecordingFiles write_triple(const ScratchDir& dir, const std::string& meta, const std::string& tmeta,
                            const std::string& tracks) {
  return {dir.write("meta.csv", meta), dir.write("tmeta.csv", tmeta), dir.write("tracks.csv", tracks)};
}

ColumnMap positions_only() {
  ColumnMap cm = ColumnMap::identity();
  for (const char* k : {"heading", "vx", "vy", "ax", "ay"}) cm.entries.erase(k);
  return cm;
}

}  // namespace

TEST_SUITE("trajdata") {
  TEST_CASE("speed is the velocity norm") {
    TrackSample s;
    s.velocity = {3, 4};
    CHECK(speed(s) == 5.0);
    s.velocity = {0, 0};
    CHECK(speed(s) == 0.0);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0, 10);
    for (int i = 0; i < 1000; ++i) {
      s.velocity = {n(rng), n(rng)};
      CHECK(std::abs(speed(s) - std::sqrt(s.velocity.x * s.velocity.x + s.velocity.y * s.velocity.y)) <= 1e-12);
    }
  }

  TEST_CASE("agent kind names and aliases") {
    for (AgentKind k : kAllKinds) CHECK(parse_agent_kind(to_string(k)) == k);
    CHECK(parse_agent_kind("ped") == AgentKind::pedestrian);
    CHECK(parse_agent_kind("bike") == AgentKind::bicycle);
    CHECK_FALSE(parse_agent_kind("tram").has_value());
  }

  TEST_CASE("planted fixture loads with one kind per track") {
    const auto dir = oracle::fixture_dir();
    const Recording rec = load_recording(
        {dir / "planted_recordingMeta.csv", dir / "planted_tracksMeta.csv", dir / "planted_tracks.csv"},
        ColumnMap::identity());
    CHECK(rec.frame_rate == 25.0);
    CHECK(rec.traffic_space_id == "synthetic-x");
    REQUIRE(!rec.tracks.empty());
    std::set<int> ids;
    for (const auto& t : rec.tracks) {
      CHECK(ids.insert(t.track_id).second);
      CHECK(t.final_frame - t.initial_frame + 1 == static_cast<long long>(t.size()));
      for (std::size_t i = 1; i < t.size(); ++i) CHECK(t.samples[i].frame == t.samples[i - 1].frame + 1);
    }
  }

  TEST_CASE("empty tracks file gives zero tracks") {
    ScratchDir dir("empty");
    const auto files = write_triple(dir, "recording_id,frame_rate,traffic_space_id\n3,25,x\n", "track_id,kind,width,length\n",
                                    "track_id,frame,x,y,heading,vx,vy,ax,ay\n");
    const Recording rec = load_recording(files, ColumnMap::identity());
    CHECK(rec.recording_id == 3);
    CHECK(rec.tracks.empty());
  }

  TEST_CASE("frame rate defaults to 25 Hz") {
    ScratchDir dir("rate");
    ColumnMap cm = ColumnMap::identity();
    cm.entries.erase("frame_rate");
    const auto files = write_triple(dir, "recording_id,traffic_space_id\n1,x\n", "track_id,kind,width,length\n",
                                    "track_id,frame,x,y,heading,vx,vy,ax,ay\n");
    CHECK(load_recording(files, cm).frame_rate == 25.0);
  }

  TEST_CASE("missing column names the column") {
    ScratchDir dir("missing");
    const auto files = write_triple(dir, "recording_id,frame_rate,traffic_space_id\n1,25,x\n", "track_id,kind,width,length\n1,car,1.8,4.5\n",
                                    "track_id,frame,x\n1,0,0\n");
    try {
      load_recording(files, positions_only());
      FAIL("expected an ingestion error");
    } catch (const IngestError& e) {
      CHECK(std::string(e.what()).find("'y'") != std::string::npos);
    }
  }

  TEST_CASE("non-monotone frames name the track") {
    ScratchDir dir("monotone");
    const auto files = write_triple(dir, "recording_id,frame_rate,traffic_space_id\n1,25,x\n", "track_id,kind,width,length\n42,car,1.8,4.5\n",
                                    "track_id,frame,x,y\n42,0,0,0\n42,2,1,0\n42,1,2,0\n");
    try {
      load_recording(files, positions_only());
      FAIL("expected an ingestion error");
    } catch (const IngestError& e) {
      CHECK(std::string(e.what()).find("track 42") != std::string::npos);
    }
  }

  TEST_CASE("velocities without columns are central differences") {
    ScratchDir dir("derived");
    const auto files = write_triple(dir, "recording_id,frame_rate,traffic_space_id\n1,10,x\n", "track_id,kind,width,length\n1,car,1.8,4.5\n",
                                    "track_id,frame,x,y\n1,0,0,0\n1,1,1,0\n1,2,3,1\n");
    const Recording rec = load_recording(files, positions_only());
    const auto& s = rec.tracks.at(0).samples;
    // Hand computation at 10 Hz: forward, central, backward.
    CHECK(s[0].velocity.x == doctest::Approx(10.0));
    CHECK(s[0].velocity.y == doctest::Approx(0.0));
    CHECK(s[1].velocity.x == doctest::Approx(15.0));
    CHECK(s[1].velocity.y == doctest::Approx(5.0));
    CHECK(s[2].velocity.x == doctest::Approx(20.0));
    CHECK(s[2].velocity.y == doctest::Approx(10.0));
  }

  TEST_CASE("constant velocity track derives the constant") {
    std::vector<Vec2> pos;
    for (int i = 0; i < 50; ++i) pos.push_back({0.3 + 0.52 * i, -1.0 - 0.16 * i});
    const auto v = central_differences(pos, 25.0);
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      CHECK(std::abs(v[i].x - 13.0) <= 1e-9);
      CHECK(std::abs(v[i].y + 4.0) <= 1e-9);
    }
  }

  TEST_CASE("gaps are repaired by interpolation and counted") {
    Track t;
    t.track_id = 5;
    for (long long f : {10, 11, 14}) {
      TrackSample s;
      s.frame = f;
      s.position = {static_cast<double>(f), 0.0};
      t.samples.push_back(s);
    }
    finalize_track(t);
    CHECK(t.initial_frame == 10);
    CHECK(t.final_frame == 14);
    CHECK(t.size() == 5);
    CHECK(t.repaired_frames == 2);
    CHECK(t.at_frame(12).position.x == doctest::Approx(12.0));
    CHECK(t.at_frame(13).position.x == doctest::Approx(13.0));
  }

  TEST_CASE("lifetime in seconds") {
    Track t;
    t.initial_frame = 7;
    t.final_frame = 56;
    CHECK(t.lifetime_seconds(25.0) == 50.0 / 25.0);
  }

  TEST_CASE("save and load round-trip positions bit-identically") {
    const auto space = make_intersection();
    const auto planted = make_planted_recording(space);
    ScratchDir dir("roundtrip");
    const RecordingFiles files{dir / "m.csv", dir / "tm.csv", dir / "t.csv"};
    save_recording(planted.recording, files);
    const Recording back = load_recording(files, ColumnMap::identity());
    REQUIRE(back.tracks.size() == planted.recording.tracks.size());
    for (std::size_t i = 0; i < back.tracks.size(); ++i) {
      const auto& a = planted.recording.tracks[i];
      const auto& b = back.tracks[i];
      REQUIRE(a.size() == b.size());
      for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a.samples[k].position == b.samples[k].position);
        CHECK(a.samples[k].heading == b.samples[k].heading);
      }
    }
  }

  TEST_CASE("column map file and degrees") {
    ScratchDir dir("colmap");
    const auto map = dir.write("columns.txt",
                               "# source headers\nrecording_id = recId\nframe_rate = fps\ntrack_id = id\n"
                               "kind = class\nframe = f\nx = xc\ny = yc\nheading = psi\nheading_unit = deg\n");
    const auto files = write_triple(dir, "recId,fps\n9,25\n", "id,class\n1,Car\n",
                                    "id,f,xc,yc,psi\n1,0,0,0,90\n1,1,0,1,90\n");
    const Recording rec = load_recording(files, ColumnMap::read(map));
    CHECK(rec.recording_id == 9);
    REQUIRE(rec.tracks.size() == 1);
    CHECK(rec.tracks[0].samples[0].heading == doctest::Approx(std::numbers::pi / 2));
  }

  TEST_CASE("affine transform from the meta file") {
    ScratchDir dir("affine");
    ColumnMap cm = positions_only();
    for (const char* k : {"affine_xx", "affine_xy", "affine_yx", "affine_yy", "affine_tx", "affine_ty"}) cm.entries[k] = k;
    const auto files = write_triple(dir,
                                    "recording_id,frame_rate,traffic_space_id,affine_xx,affine_xy,affine_yx,affine_yy,affine_tx,affine_ty\n"
                                    "1,25,x,0,-1,1,0,100,200\n",
                                    "track_id,kind,width,length\n1,car,1.8,4.5\n", "track_id,frame,x,y\n1,0,1,0\n1,1,2,0\n");
    const Recording rec = load_recording(files, cm);
    // 90 degree rotation then translation.
    CHECK(rec.tracks[0].samples[0].position.x == doctest::Approx(100.0));
    CHECK(rec.tracks[0].samples[0].position.y == doctest::Approx(201.0));
  }

  TEST_CASE("duplicate track ids are rejected") {
    ScratchDir dir("dup");
    const auto files = write_triple(dir, "recording_id,frame_rate,traffic_space_id\n1,25,x\n", "track_id,kind,width,length\n1,car,1.8,4.5\n1,bus,2.5,12\n",
                                    "track_id,frame,x,y\n");
    CHECK_THROWS_AS(load_recording(files, ColumnMap::identity()), IngestError);
  }
}
