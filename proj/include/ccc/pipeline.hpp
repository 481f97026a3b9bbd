#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "ccc/aggregate.hpp"
#include "ccc/census.hpp"
#include "ccc/metrics.hpp"
#include "ccc/synth.hpp"
#include "ccc/trainer.hpp"

// File-in/file-out stages behind the ccc subcommands. An empty tables or
// mappings directory selects the built-in tables.
namespace ccc::pipeline {

ConditionalTables load_tables(const std::filesystem::path& dir);
LabelMapping load_mapping(const std::filesystem::path& dir);

std::vector<ConstraintSet> run_constraints(const std::filesystem::path& census, const std::filesystem::path& tables_dir,
                                           const std::filesystem::path& out);

// Grids are <sector>_footprint.asc and <sector>_built.asc in `grids`, or a
// pixel-table CSV when `grids` names a file.
std::vector<PixelSet> run_select(const std::filesystem::path& grids, const std::filesystem::path& constraints,
                                 const std::filesystem::path& out);

// Bands are <sector>_<BAND>.asc in `bands`, or a band-table CSV when `bands`
// names a file.
std::vector<FeatureMatrix> run_features(const std::filesystem::path& bands, const std::filesystem::path& pixels,
                                        const std::filesystem::path& out_dir);

// Sectors for training; groundtruth is optional (empty path).
std::vector<SectorData> load_sectors(const std::filesystem::path& features_dir,
                                     const std::filesystem::path& constraints,
                                     const std::filesystem::path& groundtruth,
                                     const std::filesystem::path& mappings_dir);

// Writes losses.csv, best.ckpt and final.ckpt into out_dir.
TrainResult run_train(const std::vector<SectorData>& sectors, const TrainConfig& config,
                      const std::filesystem::path& out_dir);

std::vector<AssignmentTable> predict(const NetworkParameters& params, const std::vector<SectorData>& sectors,
                                     const std::vector<ConstraintSet>& constraints, const ConditionalTables& tables,
                                     const FitOptions& fit);

std::vector<AssignmentTable> run_predict(const std::filesystem::path& checkpoint,
                                         const std::filesystem::path& features_dir,
                                         const std::filesystem::path& constraints,
                                         const std::filesystem::path& tables_dir, const std::filesystem::path& out_dir,
                                         const FitOptions& fit);

// Class lists per indicator come from the constraints when given, otherwise
// from the mapping targets and predicted names.
std::vector<PrecisionReport> evaluate(const std::vector<AssignmentTable>& assignments,
                                      const std::vector<GroundtruthRecord>& groundtruth, const LabelMapping& mapping,
                                      const std::vector<ConstraintSet>* constraints = nullptr);

std::vector<PrecisionReport> run_evaluate(const std::filesystem::path& predictions_dir,
                                          const std::filesystem::path& groundtruth,
                                          const std::filesystem::path& mappings_dir, const std::filesystem::path& out,
                                          const std::filesystem::path& constraints = {});

// summary.csv; with `grids` set, also one class raster per sector and
// indicator plus legend.csv in `raster_dir`.
std::vector<SummaryRow> run_aggregate(const std::filesystem::path& predictions_dir,
                                      const std::filesystem::path& hierarchy, const std::filesystem::path& out,
                                      const std::filesystem::path& grids = {},
                                      const std::filesystem::path& raster_dir = {});

}  // namespace ccc::pipeline
