// ccc: census-constrained clustering pipeline.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ccc/config.hpp"
#include "ccc/csv.hpp"
#include "ccc/error.hpp"
#include "ccc/kernels.hpp"
#include "ccc/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ccc;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;

struct Globals {
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool verbose = false;
};

TrainConfig load_train_config(const std::string& path, const Globals& g) {
  TrainConfig c = path.empty() ? TrainConfig{} : train_config_from(KeyValueConfig::read(path));
  if (g.seed) c.seed = *g.seed;
  return c;
}

void log(const Globals& g, const std::string& msg) {
  if (g.verbose) std::cerr << msg << '\n';
}

std::string fmt(const std::optional<double>& v) { return v ? csv::format_double(*v) : "n/a"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Census-constrained clustering of building indicators"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Random seed (overrides config files)");
  app.add_option("--threads", g.threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  app.add_flag("--verbose,-v", g.verbose, "Progress on stderr");

  std::string census, tables, out, grids, constraints, bands, pixels, features, groundtruth, mappings, config,
      checkpoint, predictions, hierarchy, rasters;

  auto* c_constraints = app.add_subcommand("constraints", "Derive per-sector class targets from census shares");
  c_constraints->add_option("--census", census)->required()->check(CLI::ExistingFile);
  c_constraints->add_option("--tables", tables, "Directory with cond_*.csv (default: built-in tables)");
  c_constraints->add_option("--out", out)->required();

  auto* c_select = app.add_subcommand("select", "Select exactly n candidate pixels per sector");
  c_select->add_option("--grids", grids, "Directory of <sector>_{footprint,built}.asc or a pixel-table CSV")
      ->required()->check(CLI::ExistingPath);
  c_select->add_option("--constraints", constraints)->required()->check(CLI::ExistingFile);
  c_select->add_option("--out", out)->required();

  auto* c_features = app.add_subcommand("features", "Build normalized feature matrices");
  c_features->add_option("--bands", bands, "Directory of <sector>_<BAND>.asc or a band-table CSV")
      ->required()->check(CLI::ExistingPath);
  c_features->add_option("--pixels", pixels)->required()->check(CLI::ExistingFile);
  c_features->add_option("--out", out)->required();

  bool cross_validate_flag = false;
  std::optional<int> epochs;
  auto* c_train = app.add_subcommand("train", "Jointly train the autoencoder and the constrained clustering");
  c_train->add_option("--features", features)->required()->check(CLI::ExistingDirectory);
  c_train->add_option("--constraints", constraints)->required()->check(CLI::ExistingFile);
  c_train->add_option("--groundtruth", groundtruth)->check(CLI::ExistingFile);
  c_train->add_option("--mappings", mappings, "Directory with mapping_*.csv (default: built-in mapping)");
  c_train->add_option("--config", config, "Flat key = value training config")->check(CLI::ExistingFile);
  c_train->add_option("--epochs", epochs, "Override the configured epoch count");
  c_train->add_flag("--cross-validate", cross_validate_flag, "Also run k-fold cross-validation (writes cv.csv)");
  c_train->add_option("--out", out)->required();

  auto* c_predict = app.add_subcommand("predict", "Assign classes with a trained checkpoint");
  c_predict->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  c_predict->add_option("--features", features)->required()->check(CLI::ExistingDirectory);
  c_predict->add_option("--constraints", constraints)->required()->check(CLI::ExistingFile);
  c_predict->add_option("--tables", tables);
  c_predict->add_option("--config", config)->check(CLI::ExistingFile);
  c_predict->add_option("--out", out)->required();

  auto* c_evaluate = app.add_subcommand("evaluate", "Modified precision against groundtruth");
  c_evaluate->add_option("--predictions", predictions)->required()->check(CLI::ExistingDirectory);
  c_evaluate->add_option("--groundtruth", groundtruth)->required()->check(CLI::ExistingFile);
  c_evaluate->add_option("--mappings", mappings);
  c_evaluate->add_option("--constraints", constraints)->check(CLI::ExistingFile);
  c_evaluate->add_option("--out", out)->required();

  auto* c_aggregate = app.add_subcommand("aggregate", "Per-class totals at sector, district and province level");
  c_aggregate->add_option("--predictions", predictions)->required()->check(CLI::ExistingDirectory);
  c_aggregate->add_option("--hierarchy", hierarchy)->required()->check(CLI::ExistingFile);
  c_aggregate->add_option("--grids", grids, "Footprint rasters used as templates for class rasters");
  c_aggregate->add_option("--rasters", rasters, "Output directory for class rasters");
  c_aggregate->add_option("--out", out)->required();

  SynthConfig synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic scenario with known classes");
  c_synth->add_option("--sectors", synth.sectors)->check(CLI::PositiveNumber);
  c_synth->add_option("--pixels", synth.pixels_per_sector)->check(CLI::PositiveNumber);
  c_synth->add_option("--noise", synth.noise)->check(CLI::NonNegativeNumber);
  c_synth->add_option("--coverage", synth.coverage)->check(CLI::Range(0.0, 1.0));
  c_synth->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }
  if (*seed_opt) g.seed = seed_value;
  if (g.threads > 0) kernels::set_threads(g.threads);

  try {
    if (*c_constraints) {
      const auto sets = pipeline::run_constraints(census, tables, out);
      log(g, "constraints: " + std::to_string(sets.size()) + " sets -> " + out);
    } else if (*c_select) {
      const auto sel = pipeline::run_select(grids, constraints, out);
      for (const auto& s : sel)
        log(g, "select: " + s.sector_id + " " + std::to_string(s.pixels.size()) + " pixels, threshold " +
                   csv::format_double(s.threshold_used));
    } else if (*c_features) {
      const auto fms = pipeline::run_features(bands, pixels, out);
      log(g, "features: " + std::to_string(fms.size()) + " sectors -> " + out);
    } else if (*c_train) {
      TrainConfig tc = load_train_config(config, g);
      if (epochs) tc.epochs = *epochs;
      tc.validate();
      const auto sectors = pipeline::load_sectors(features, constraints, groundtruth, mappings);
      const auto result = pipeline::run_train(sectors, tc, out);
      const auto& sel = result.records[result.selected];
      log(g, "train: selected epoch " + std::to_string(sel.epoch) + ", clustering " +
                 csv::format_double(sel.clustering) + ", precision roof/wall/height " + fmt(sel.train[0].precision) +
                 "/" + fmt(sel.train[1].precision) + "/" + fmt(sel.train[2].precision));
      if (cross_validate_flag) {
        const auto cv = cross_validate(tc, sectors);
        csv::write_file(fs::path(out) / "cv.csv", write_cross_validation(cv));
        log(g, "cross-validation: " + std::to_string(cv.folds.size()) + " folds -> " + out + "/cv.csv");
      }
    } else if (*c_predict) {
      const TrainConfig tc = load_train_config(config, g);
      const auto tables_out = pipeline::run_predict(checkpoint, features, constraints, tables, out, tc.fit);
      log(g, "predict: " + std::to_string(tables_out.size()) + " sectors -> " + out);
    } else if (*c_evaluate) {
      const auto reports = pipeline::run_evaluate(predictions, groundtruth, mappings, out, constraints);
      for (const auto& r : reports)
        for (const auto& s : r.scores)
          log(g, "evaluate: " + r.sector_id + " " + std::string(to_string(s.indicator)) + " precision " +
                     fmt(s.precision));
    } else if (*c_aggregate) {
      const auto rows = pipeline::run_aggregate(predictions, hierarchy, out, grids, rasters);
      log(g, "aggregate: " + std::to_string(rows.size()) + " rows -> " + out);
    } else if (*c_synth) {
      if (g.seed) synth.seed = *g.seed;
      write_scenario(out, generate(synth));
      log(g, "synth: " + std::to_string(synth.sectors) + " sectors -> " + out);
    }
  } catch (const ValidationError& e) {
    std::cerr << "ccc: validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const InfeasibleError& e) {
    std::cerr << "ccc: infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "ccc: error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}
