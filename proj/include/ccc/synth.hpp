#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ccc/aggregate.hpp"
#include "ccc/ascii_grid.hpp"
#include "ccc/census.hpp"
#include "ccc/features.hpp"
#include "ccc/metrics.hpp"
#include "ccc/pixel_selector.hpp"
#include "ccc/trainer.hpp"

namespace ccc {

struct SynthConfig {
  std::uint64_t seed = 0;
  int sectors = 3;
  long long pixels_per_sector = 1000;  // target; the census is tuned to hit it
  double noise = 0.0;                  // band noise sd in units of the class spacing
  double coverage = 0.3;               // share of selected pixels with groundtruth
  int sectors_per_district = 2;
};

struct TruthRecord {
  std::string sector_id;
  Pixel pixel;
  std::array<std::string, 3> classes;  // roof, wall, height
};

struct SectorGrids {
  AsciiGrid footprint;
  AsciiGrid built;
  BandRasters bands;
};

// A self-consistent input bundle with known per-pixel classes.
struct Scenario {
  SynthConfig config;
  std::vector<CensusRecord> census;
  ConditionalTables tables;
  LabelMapping mapping;
  std::map<std::string, SectorGrids> grids;
  std::vector<GroundtruthRecord> groundtruth;
  std::vector<TruthRecord> truth;  // every selected pixel, row-major per sector
  std::vector<HierarchyEntry> hierarchy;

  std::vector<std::string> sector_ids() const;
};

// Census shares and populations are tuned so the derived pixel targets match
// the planted class counts exactly; each indicator's classes sit at evenly
// spaced positions along a random direction of its own four bands, so the
// classes are linearly recoverable at noise 0.
Scenario generate(const SynthConfig& config);

// Training settings for synthetic scenarios of a few thousand pixels: a larger
// step than the library default, smaller batches and four restarts, so 200
// epochs suffice.
TrainConfig scenario_train_config(std::uint64_t seed);

// Writes census.csv, cond_*.csv, mapping_*.csv, grids/<sector>_{footprint,built}.asc,
// bands/<sector>_<BAND>.asc, gt.csv, truth.csv, hierarchy.csv and train.cfg.
void write_scenario(const std::filesystem::path& dir, const Scenario& scenario);

// truth.csv: sector_id,row,col,roof_class,wall_class,height_class
std::string write_truth(const std::vector<TruthRecord>& truth);
std::vector<TruthRecord> read_truth(const std::filesystem::path& path);

// Label mapping where every groundtruth label allows exactly its planted
// class: building-type labels "<roof> / <wall>", heights in 3 m bands.
LabelMapping identity_mapping(const std::vector<std::string>& roof_classes,
                              const std::vector<std::string>& wall_classes,
                              const std::vector<std::string>& height_classes);
double height_midpoint(std::size_t height_class, std::size_t height_class_count);

}  // namespace ccc
