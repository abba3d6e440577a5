// Writes the synthetic intersection fixtures: map, planted recording, ground truth and
// example configs. Usage: junction_fixtures <output dir>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "junction/synthetic.hpp"
#include "junction/traffic_space.hpp"
#include "junction/trajdata.hpp"

namespace fs = std::filesystem;

namespace {

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: junction_fixtures <output dir>\n";
    return 1;
  }
  try {
    const fs::path dir = argv[1];
    fs::create_directories(dir);
    const auto space = junction::make_intersection();
    write(dir / "map.json", junction::traffic_space_to_json(space));

    const auto planted = junction::make_planted_recording(space);
    junction::save_recording(planted.recording, {dir / "planted_recordingMeta.csv", dir / "planted_tracksMeta.csv",
                                                 dir / "planted_tracks.csv"});
    {
      std::ofstream out(dir / "planted.csv", std::ios::binary);
      junction::write_planted_pairs(out, planted.pairs);
    }

    write(dir / "extract.conf",
          "# Planted-scenario recording on the synthetic four-arm intersection.\n"
          "paths.data = .\n"
          "data.prefix = planted_\n"
          "paths.map = map.json\n"
          "seed = 1\n");
    write(dir / "spawn.json",
          "{\n"
          "  \"duration\": 60,\n"
          "  \"seed\": 1,\n"
          "  \"routes\": [\n"
          "    {\"entry\": \"N\", \"exit\": \"S\", \"kind\": \"car\", \"rate\": 0.08},\n"
          "    {\"entry\": \"S\", \"exit\": \"N\", \"kind\": \"car\", \"rate\": 0.08},\n"
          "    {\"entry\": \"E\", \"exit\": \"W\", \"kind\": \"car\", \"rate\": 0.05},\n"
          "    {\"entry\": \"W\", \"exit\": \"N\", \"kind\": \"car\", \"rate\": 0.05},\n"
          "    {\"entry\": \"S\", \"exit\": \"E\", \"kind\": \"car\", \"rate\": 0.04},\n"
          "    {\"entry\": \"NE\", \"exit\": \"NW\", \"kind\": \"pedestrian\", \"rate\": 0.05}\n"
          "  ]\n"
          "}\n");
    write(dir / "simulate.conf",
          "paths.map = map.json\n"
          "sim.spawn = spawn.json\n"
          "sim.duration = 60\n"
          "seed = 1\n");
    write(dir / "calibrate.conf",
          "# Small GA over the planted recording; raise ga.* for a real calibration.\n"
          "paths.data = .\n"
          "data.prefix = planted_\n"
          "paths.map = map.json\n"
          "calibrate.params = car.v0:8:14,car.a_max:1:3\n"
          "calibrate.max_agents = 12\n"
          "ga.population = 8\n"
          "ga.generations = 4\n"
          "seed = 1\n");
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}
