#pragma once

// Runs a synthetic scenario through constraints, selection and features on
// disk, the same way the CLI does, and loads the training sectors.

#include <filesystem>
#include <string>
#include <vector>

#include "ccc/pipeline.hpp"
#include "ccc/synth.hpp"

namespace ccc::testing {

struct PreparedScenario {
  std::filesystem::path dir;
  Scenario scenario;
  std::vector<ConstraintSet> constraints;
  std::vector<SectorData> sectors;
};

inline PreparedScenario prepare_scenario(const SynthConfig& config, const std::string& name) {
  PreparedScenario p;
  p.dir = std::filesystem::temp_directory_path() / ("ccc_fixture_" + name);
  std::filesystem::remove_all(p.dir);
  std::filesystem::create_directories(p.dir);
  p.scenario = generate(config);
  const auto sc = p.dir / "scenario";
  write_scenario(sc, p.scenario);
  p.constraints = pipeline::run_constraints(sc / "census.csv", sc, p.dir / "constraints.csv");
  pipeline::run_select(sc / "grids", p.dir / "constraints.csv", p.dir / "pixels.csv");
  pipeline::run_features(sc / "bands", p.dir / "pixels.csv", p.dir / "features");
  p.sectors = pipeline::load_sectors(p.dir / "features", p.dir / "constraints.csv", sc / "gt.csv", sc);
  return p;
}

}  // namespace ccc::testing
