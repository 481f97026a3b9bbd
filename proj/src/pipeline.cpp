#include "ccc/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "ccc/csv.hpp"
#include "ccc/error.hpp"
#include "ccc/features.hpp"
#include "ccc/pixel_selector.hpp"
#include "ccc/taxonomy.hpp"

namespace ccc::pipeline {

namespace fs = std::filesystem;

namespace {

const ConstraintSet* find_set(const std::vector<ConstraintSet>& sets, std::string_view sector, Settlement s) {
  for (const auto& c : sets)
    if (c.sector_id == sector && c.settlement == s) return &c;
  return nullptr;
}

std::vector<std::string> names_of(const ClassCounts& counts) {
  std::vector<std::string> out;
  for (const auto& [n, c] : counts) out.push_back(n);
  return out;
}

}  // namespace

ConditionalTables load_tables(const fs::path& dir) { return dir.empty() ? default_tables() : ConditionalTables::read(dir); }

LabelMapping load_mapping(const fs::path& dir) { return dir.empty() ? default_label_mapping() : LabelMapping::read(dir); }

std::vector<ConstraintSet> run_constraints(const fs::path& census, const fs::path& tables_dir, const fs::path& out) {
  const auto records = read_census(census);
  const auto tables = load_tables(tables_dir);
  std::vector<ConstraintSet> sets;
  for (const auto& r : records) {
    auto sc = derive_constraints(r, tables);
    sets.push_back(std::move(sc.urban));
    sets.push_back(std::move(sc.rural));
  }
  csv::write_file(out, write_constraints(sets));
  return sets;
}

std::vector<PixelSet> run_select(const fs::path& grids, const fs::path& constraints, const fs::path& out) {
  const auto sets = read_constraints(constraints);
  std::map<std::string, PixelGrid> table;
  if (fs::is_regular_file(grids)) table = read_pixel_table(grids);
  std::vector<PixelSet> selected;
  for (const auto& sector : constraint_sectors(sets)) {
    long long n = 0;
    for (const auto& [name, c] : sector_pixel_targets(sets, sector, Indicator::wall)) n += c;
    PixelGrid grid;
    if (fs::is_regular_file(grids)) {
      auto it = table.find(sector);
      if (it == table.end()) throw DataIntegrityError("pixel table has no cells for sector " + sector);
      grid = it->second;
    } else {
      grid = PixelGrid::from_rasters(sector, AsciiGrid::read(grids / (sector + "_footprint.asc")),
                                     AsciiGrid::read(grids / (sector + "_built.asc")));
    }
    selected.push_back(select_pixels(grid, n));
  }
  csv::write_file(out, write_pixel_sets(selected));
  return selected;
}

std::vector<FeatureMatrix> run_features(const fs::path& bands, const fs::path& pixels, const fs::path& out_dir) {
  const auto sets = read_pixel_sets(pixels);
  std::vector<FeatureMatrix> out;
  if (fs::is_regular_file(bands)) {
    const auto table = read_band_table(bands);
    for (const auto& ps : sets) {
      auto it = table.find(ps.sector_id);
      if (it == table.end()) throw DataIntegrityError("band table has no rows for sector " + ps.sector_id);
      out.push_back(assemble_from_table(it->second, ps));
    }
  } else {
    for (const auto& ps : sets) out.push_back(assemble(read_band_rasters(bands, ps.sector_id), ps));
  }
  for (const auto& fm : out) write_features(out_dir, fm);
  return out;
}

std::vector<SectorData> load_sectors(const fs::path& features_dir, const fs::path& constraints,
                                     const fs::path& groundtruth, const fs::path& mappings_dir) {
  const auto sets = read_constraints(constraints);
  std::vector<GroundtruthRecord> gt;
  std::optional<LabelMapping> mapping;
  if (!groundtruth.empty()) {
    gt = read_groundtruth(groundtruth);
    mapping = load_mapping(mappings_dir);
  }
  std::vector<SectorData> out;
  for (auto& fm : read_feature_dir(features_dir))
    out.push_back(make_sector_data(std::move(fm), sets, mapping ? &gt : nullptr, mapping ? &*mapping : nullptr));
  return out;
}

TrainResult run_train(const std::vector<SectorData>& sectors, const TrainConfig& config, const fs::path& out_dir) {
  TrainConfig c = config;
  c.loss_curve = out_dir / "losses.csv";
  auto result = train(c, sectors);
  result.best.save(out_dir / "best.ckpt");
  result.final.save(out_dir / "final.ckpt");
  return result;
}

std::vector<AssignmentTable> predict(const NetworkParameters& params, const std::vector<SectorData>& sectors,
                                     const std::vector<ConstraintSet>& constraints, const ConditionalTables& tables,
                                     const FitOptions& fit) {
  std::vector<AssignmentTable> out(sectors.size());
  std::vector<std::string> errors(sectors.size());
#pragma omp parallel for schedule(static)
  for (std::size_t s = 0; s < sectors.size(); ++s) {
    try {
      const auto& sd = sectors[s];
      const auto pass = evaluate_sector(params, sd, fit);
      AssignmentTable& a = out[s];
      a.sector_id = sd.sector_id();
      a.pixels = sd.features.pixels;
      for (std::size_t i = 0; i < 3; ++i)
        for (int h : pass.states[i].labels) a.classes[i].push_back(sd.specs[i].class_names[static_cast<std::size_t>(h)]);

      const auto* urban = find_set(constraints, sd.sector_id(), Settlement::urban);
      const auto* rural = find_set(constraints, sd.sector_id(), Settlement::rural);
      const ClassCounts none;
      const auto& walls = sd.specs[1].class_names;
      const auto& wall_labels = pass.states[1].labels;
      const auto& wall_latents = pass.states[1].latents;
      const auto settlement = split_settlement(wall_labels, walls, wall_latents,
                                               urban ? urban->pixels(Indicator::wall) : none,
                                               rural ? rural->pixels(Indicator::wall) : none);
      a.classes[3] = assign_macro(sd.sector_id(), wall_labels, walls, wall_latents, settlement, tables.wall_macro).labels;
    } catch (const std::exception& e) {
      errors[s] = e.what();
    }
  }
  for (std::size_t s = 0; s < sectors.size(); ++s)
    if (!errors[s].empty()) throw ValidationError("predict, sector " + sectors[s].sector_id() + ": " + errors[s]);
  return out;
}

std::vector<AssignmentTable> run_predict(const fs::path& checkpoint, const fs::path& features_dir,
                                         const fs::path& constraints, const fs::path& tables_dir,
                                         const fs::path& out_dir, const FitOptions& fit) {
  const auto ck = Checkpoint::load(checkpoint);
  const auto sets = read_constraints(constraints);
  std::vector<SectorData> sectors;
  for (auto& fm : read_feature_dir(features_dir)) sectors.push_back(make_sector_data(std::move(fm), sets));
  auto tables = predict(ck.params, sectors, sets, load_tables(tables_dir), fit);
  for (const auto& t : tables) save_assignments(out_dir, t);
  return tables;
}

std::vector<PrecisionReport> evaluate(const std::vector<AssignmentTable>& assignments,
                                      const std::vector<GroundtruthRecord>& groundtruth, const LabelMapping& mapping,
                                      const std::vector<ConstraintSet>* constraints) {
  std::vector<PrecisionReport> reports;
  for (const auto& a : assignments) {
    PrecisionReport rep;
    rep.sector_id = a.sector_id;
    for (std::size_t i = 0; i < 3; ++i) {
      const Indicator ind = kLatentIndicators[i];
      const auto& predicted = a.classes[i];
      std::vector<std::string> classes;
      if (constraints) {
        classes = names_of(sector_pixel_targets(*constraints, a.sector_id, ind));
      } else {
        std::set<std::string> names(predicted.begin(), predicted.end());
        if (ind == Indicator::height) {
          for (const auto& [range, allowed] : mapping.height_ranges()) names.insert(allowed.begin(), allowed.end());
        } else {
          for (const auto& [label, allowed] : mapping.labels(ind)) names.insert(allowed.begin(), allowed.end());
        }
        classes.assign(names.begin(), names.end());
      }
      std::vector<int> idx;
      idx.reserve(predicted.size());
      for (const auto& p : predicted) {
        auto it = std::find(classes.begin(), classes.end(), p);
        if (it == classes.end())
          throw SchemaError("sector " + a.sector_id + ": predicted " + std::string(to_string(ind)) + " class '" + p +
                            "' is not a known class");
        idx.push_back(static_cast<int>(it - classes.begin()));
      }
      const auto overlay = build_overlay(a.pixels, groundtruth, a.sector_id, mapping, ind, classes);
      rep.scores.push_back(score_indicator(ind, idx, overlay, classes.size()));
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

std::vector<PrecisionReport> run_evaluate(const fs::path& predictions_dir, const fs::path& groundtruth,
                                          const fs::path& mappings_dir, const fs::path& out,
                                          const fs::path& constraints) {
  std::optional<std::vector<ConstraintSet>> sets;
  if (!constraints.empty()) sets = read_constraints(constraints);
  auto reports = evaluate(read_assignment_dir(predictions_dir), read_groundtruth(groundtruth),
                          load_mapping(mappings_dir), sets ? &*sets : nullptr);
  csv::write_file(out, write_reports(reports));
  return reports;
}

std::vector<SummaryRow> run_aggregate(const fs::path& predictions_dir, const fs::path& hierarchy, const fs::path& out,
                                      const fs::path& grids, const fs::path& raster_dir) {
  const auto assignments = read_assignment_dir(predictions_dir);
  auto rows = aggregate(assignments, read_hierarchy(hierarchy));
  csv::write_file(out, write_summary(rows));
  if (!grids.empty() && !raster_dir.empty()) {
    csv::Writer legend({"indicator", "value", "class"});
    for (int i = 0; i < 4; ++i) {
      const auto ind = static_cast<Indicator>(i);
      std::set<std::string> names;
      for (const auto& a : assignments) names.insert(a.of(ind).begin(), a.of(ind).end());
      names.erase(std::string());
      const std::vector<std::string> order(names.begin(), names.end());
      for (std::size_t v = 0; v < order.size(); ++v)
        legend.row({std::string(to_string(ind)), std::to_string(v), order[v]});
      for (const auto& a : assignments) {
        if (std::any_of(a.of(ind).begin(), a.of(ind).end(), [](const auto& s) { return s.empty(); })) continue;
        const auto like = AsciiGrid::read(grids / (a.sector_id + "_footprint.asc"));
        class_raster(a, ind, order, like)
            .write(raster_dir / (a.sector_id + "_" + std::string(to_string(ind)) + ".asc"));
      }
    }
    legend.save(raster_dir / "legend.csv");
  }
  return rows;
}

}  // namespace ccc::pipeline
