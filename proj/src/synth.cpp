#include "ccc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "ccc/config.hpp"
#include "ccc/csv.hpp"
#include "ccc/error.hpp"

namespace ccc {

namespace {

constexpr double kSpacing = 100.0;
constexpr double kHeightBand = 3.0;

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double round_to(double v, double step) { return std::round(v / step) * step; }

// Random shares rounded to 4 decimals that sum to exactly 1 within rounding.
std::vector<ClassShare> random_shares(std::mt19937_64& rng, const std::vector<std::string>& names) {
  std::vector<double> w(names.size());
  for (auto& x : w) x = uniform(rng, 0.05, 1.0);
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<ClassShare> out;
  double used = 0.0;
  for (std::size_t i = 0; i + 1 < names.size(); ++i) {
    const double f = round_to(w[i] / sum, 1e-4);
    out.push_back({names[i], f});
    used += f;
  }
  out.push_back({names.back(), round_to(1.0 - used, 1e-4)});
  return out;
}

long long pixel_total(const CensusRecord& c, const ConditionalTables& tables) {
  const auto sc = derive_constraints(c, tables);
  return sc.urban.pixel_total(Indicator::wall) + sc.rural.pixel_total(Indicator::wall);
}

void set_population(CensusRecord& c, long long population, double urban_share, double household_size) {
  c.urban_population = std::llround(static_cast<double>(population) * urban_share);
  c.rural_population = population - c.urban_population;
  c.private_households = std::max(1LL, std::llround(static_cast<double>(population) / household_size));
}

// Population whose derived pixel total equals `target`, or the closest found.
void tune_census(CensusRecord& c, const ConditionalTables& tables, long long target, double urban_share,
                 double household_size) {
  long long p = 100000;
  for (int it = 0; it < 30; ++it) {
    set_population(c, p, urban_share, household_size);
    const long long t = pixel_total(c, tables);
    if (t == target) return;
    p = std::max(10LL, std::llround(static_cast<double>(p) * static_cast<double>(target) / std::max(1LL, t)));
  }
  long long best_p = p, best_gap = -1;
  for (long long d = 0; d <= 400; ++d) {
    for (long long q : {p - d, p + d}) {
      if (q < 10) continue;
      set_population(c, q, urban_share, household_size);
      const long long gap = std::llabs(pixel_total(c, tables) - target);
      if (best_gap < 0 || gap < best_gap) {
        best_gap = gap;
        best_p = q;
      }
      if (gap == 0) return;
    }
  }
  set_population(c, best_p, urban_share, household_size);
}

std::string sector_name(int s) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "S%02d", s + 1);
  return buf;
}

}  // namespace

std::vector<std::string> Scenario::sector_ids() const {
  std::vector<std::string> out;
  for (const auto& c : census) out.push_back(c.sector_id);
  return out;
}

double height_midpoint(std::size_t h, std::size_t count) {
  (void)count;
  return kHeightBand * static_cast<double>(h) + kHeightBand / 2.0;
}

LabelMapping identity_mapping(const std::vector<std::string>& roof_classes,
                              const std::vector<std::string>& wall_classes,
                              const std::vector<std::string>& height_classes) {
  LabelMapping m;
  for (const auto& r : roof_classes)
    for (const auto& w : wall_classes) {
      const std::string label = r + " / " + w;
      m.add(Indicator::roof, label, r);
      m.add(Indicator::wall, label, w);
    }
  const std::size_t k = height_classes.size();
  for (std::size_t h = 0; h < k; ++h) {
    HeightRange range;
    range.lower = kHeightBand * static_cast<double>(h);
    range.upper = h + 1 == k ? std::numeric_limits<double>::infinity() : kHeightBand * static_cast<double>(h + 1);
    range.lower_closed = h > 0;
    range.upper_closed = false;
    m.add_height(range, height_classes[h]);
  }
  m.validate();
  return m;
}

Scenario generate(const SynthConfig& config) {
  if (config.sectors < 1) throw ValidationError("synth: need at least one sector");
  if (config.pixels_per_sector < 10) throw ValidationError("synth: pixels_per_sector must be at least 10");
  if (!(config.noise >= 0.0)) throw ValidationError("synth: noise must be non-negative");
  if (!(config.coverage >= 0.0 && config.coverage <= 1.0)) throw ValidationError("synth: coverage must lie in [0,1]");
  if (config.sectors_per_district < 1) throw ValidationError("synth: sectors_per_district must be positive");

  Scenario sc;
  sc.config = config;
  sc.tables = default_tables();
  const auto& walls = default_wall_classes();
  const auto& roofs = default_roof_classes();
  const auto heights = sc.tables.height_classes();
  sc.mapping = identity_mapping(roofs, walls, heights);
  const std::array<const std::vector<std::string>*, 3> class_names = {&roofs, &walls, &heights};

  std::mt19937_64 rng(mix(config.seed));

  // One signature per indicator: base level per band, a direction inside the
  // indicator's four bands and a position per class along it.
  std::array<double, 12> base{};
  for (auto& b : base) b = round_to(uniform(rng, 200.0, 400.0), 1e-3);
  std::array<std::array<double, 4>, 3> direction{};
  std::array<std::vector<double>, 3> position;
  for (std::size_t i = 0; i < 3; ++i) {
    for (auto& d : direction[i]) d = uniform(rng, 0.5, 1.0);
    position[i].resize(class_names[i]->size());
    std::iota(position[i].begin(), position[i].end(), 0.0);
  }

  for (int s = 0; s < config.sectors; ++s) {
    const std::string id = sector_name(s);
    const double urban_share = s % 3 == 0 ? 1.0 : (s % 3 == 1 ? 0.0 : 0.6);

    CensusRecord c;
    c.sector_id = id;
    c.wall_shares = random_shares(rng, walls);
    c.roof_shares = random_shares(rng, roofs);
    tune_census(c, sc.tables, config.pixels_per_sector, urban_share, round_to(uniform(rng, 3.8, 4.8), 0.01));
    c.validate();
    sc.census.push_back(c);

    const auto sets = derive_constraints(c, sc.tables);
    const std::vector<ConstraintSet> both = {sets.urban, sets.rural};
    std::array<std::vector<long long>, 3> targets;
    long long n = -1;
    for (std::size_t i = 0; i < 3; ++i) {
      for (const auto& [name, count] : sector_pixel_targets(both, id, kLatentIndicators[i]))
        targets[i].push_back(count);
      const long long t = std::accumulate(targets[i].begin(), targets[i].end(), 0LL);
      if (n >= 0 && t != n) throw std::logic_error("synth: indicator pixel totals disagree");
      n = t;
    }

    // Grid with a no-data corner; footprint count on either side of n.
    const int side = static_cast<int>(std::ceil(std::sqrt(1.6 * static_cast<double>(n)))) + 2;
    const auto cells = static_cast<std::size_t>(side) * static_cast<std::size_t>(side);
    std::vector<std::size_t> valid;
    std::vector<double> built(cells, PixelGrid::kNoData);
    std::vector<std::uint8_t> fp(cells, 0);
    for (int r = 0; r < side; ++r)
      for (int col = 0; col < side; ++col) {
        const std::size_t cell = static_cast<std::size_t>(r) * side + col;
        if (r + col < side / 4) continue;
        valid.push_back(cell);
        built[cell] = round_to(uniform(rng, 0.0, 1.0), 1e-4);
      }
    std::vector<std::size_t> shuffled = valid;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const double factor = s % 2 == 0 ? 0.8 : 1.2;
    const auto footprint_n =
        std::min(shuffled.size(), static_cast<std::size_t>(std::llround(factor * static_cast<double>(n))));
    for (std::size_t i = 0; i < footprint_n; ++i) fp[shuffled[i]] = 1;

    const PixelGrid grid(id, side, side, fp, built);
    const PixelSet selected = select_pixels(grid, n);

    // Planted classes: exact target counts, shuffled independently.
    std::array<std::vector<int>, 3> planted;
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t h = 0; h < targets[i].size(); ++h)
        planted[i].insert(planted[i].end(), static_cast<std::size_t>(targets[i][h]), static_cast<int>(h));
      std::shuffle(planted[i].begin(), planted[i].end(), rng);
    }

    SectorGrids g;
    auto blank = [&](double fill) {
      AsciiGrid a;
      a.ncols = a.nrows = side;
      a.xllcorner = 100000.0 * (s + 1);
      a.yllcorner = 200000.0;
      a.cellsize = 10.0;
      a.values.assign(cells, fill);
      return a;
    };
    g.footprint = blank(PixelGrid::kNoData);
    g.built = blank(PixelGrid::kNoData);
    for (std::size_t cell : valid) {
      g.footprint.values[cell] = fp[cell];
      g.built.values[cell] = built[cell];
    }

    // Class per valid cell: planted on selected cells, random elsewhere.
    std::array<std::vector<int>, 3> cell_class;
    for (std::size_t i = 0; i < 3; ++i) cell_class[i].assign(cells, -1);
    for (std::size_t j = 0; j < selected.pixels.size(); ++j) {
      const std::size_t cell = grid.index(selected.pixels[j].row, selected.pixels[j].col);
      for (std::size_t i = 0; i < 3; ++i) cell_class[i][cell] = planted[i][j];
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::array<AsciiGrid, 12> bands;
    for (auto& b : bands) b = blank(PixelGrid::kNoData);
    for (std::size_t cell : valid) {
      for (std::size_t i = 0; i < 3; ++i)
        if (cell_class[i][cell] < 0)
          cell_class[i][cell] = static_cast<int>(rng() % class_names[i]->size());
      for (std::size_t b = 0; b < 12; ++b) {
        const std::size_t i = b / 4;
        double v = base[b] + kSpacing * position[i][static_cast<std::size_t>(cell_class[i][cell])] * direction[i][b % 4];
        if (config.noise > 0.0) v += config.noise * kSpacing * gauss(rng);
        bands[b].values[cell] = round_to(v, 1e-3);
      }
    }
    for (std::size_t b = 0; b < 12; ++b) g.bands.emplace(std::string(kBandNames[b]), std::move(bands[b]));
    sc.grids.emplace(id, std::move(g));

    for (std::size_t j = 0; j < selected.pixels.size(); ++j) {
      TruthRecord t;
      t.sector_id = id;
      t.pixel = selected.pixels[j];
      for (std::size_t i = 0; i < 3; ++i) t.classes[i] = (*class_names[i])[static_cast<std::size_t>(planted[i][j])];
      if (uniform(rng, 0.0, 1.0) < config.coverage) {
        GroundtruthRecord gt;
        gt.sector_id = id;
        gt.pixel = t.pixel;
        gt.building_type = t.classes[0] + " / " + t.classes[1];
        gt.height_m = height_midpoint(static_cast<std::size_t>(planted[2][j]), heights.size());
        sc.groundtruth.push_back(std::move(gt));
      }
      sc.truth.push_back(std::move(t));
    }
    sc.hierarchy.push_back({id, "D" + std::to_string(s / config.sectors_per_district + 1), "P1"});
  }
  return sc;
}

std::string write_truth(const std::vector<TruthRecord>& truth) {
  csv::Writer w({"sector_id", "row", "col", "roof_class", "wall_class", "height_class"});
  for (const auto& t : truth)
    w.row({t.sector_id, std::to_string(t.pixel.row), std::to_string(t.pixel.col), t.classes[0], t.classes[1],
           t.classes[2]});
  return w.str();
}

std::vector<TruthRecord> read_truth(const std::filesystem::path& path) {
  auto t = csv::Table::read(path);
  std::vector<TruthRecord> out;
  for (std::size_t r = 0; r < t.size(); ++r)
    out.push_back({t.at(r, "sector_id"),
                   {static_cast<int>(t.integer(r, "row")), static_cast<int>(t.integer(r, "col"))},
                   {t.at(r, "roof_class"), t.at(r, "wall_class"), t.at(r, "height_class")}});
  return out;
}

TrainConfig scenario_train_config(std::uint64_t seed) {
  TrainConfig tc;
  tc.seed = seed;
  tc.learning_rate = 1e-3;
  tc.batch_size = 32;
  tc.restarts = 4;
  return tc;
}

void write_scenario(const std::filesystem::path& dir, const Scenario& sc) {
  csv::write_file(dir / "census.csv", write_census(sc.census));
  sc.tables.write(dir);
  std::filesystem::create_directories(dir);
  sc.mapping.write(dir);
  for (const auto& [id, g] : sc.grids) {
    g.footprint.write(dir / "grids" / (id + "_footprint.asc"));
    g.built.write(dir / "grids" / (id + "_built.asc"));
    for (const auto& [band, grid] : g.bands) grid.write(dir / "bands" / (id + "_" + band + ".asc"));
  }
  csv::write_file(dir / "gt.csv", write_groundtruth(sc.groundtruth));
  csv::write_file(dir / "truth.csv", write_truth(sc.truth));
  csv::write_file(dir / "hierarchy.csv", write_hierarchy(sc.hierarchy));
  csv::write_file(dir / "train.cfg", to_key_values(scenario_train_config(sc.config.seed)).serialize());
}

}  // namespace ccc
