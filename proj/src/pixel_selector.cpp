#include "ccc/pixel_selector.hpp"

#include <algorithm>
#include <cmath>

#include "ccc/csv.hpp"
#include "ccc/error.hpp"

namespace ccc {

PixelGrid::PixelGrid(std::string sector_id, int nrows, int ncols, std::vector<std::uint8_t> footprint,
                     std::vector<double> built_probability, double nodata)
    : sector_id_(std::move(sector_id)),
      nrows_(nrows),
      ncols_(ncols),
      footprint_(std::move(footprint)),
      built_(std::move(built_probability)) {
  const std::size_t n = static_cast<std::size_t>(nrows_) * static_cast<std::size_t>(ncols_);
  if (nrows_ < 0 || ncols_ < 0 || footprint_.size() != n || built_.size() != n)
    throw ValidationError("sector " + sector_id_ + ": footprint and probability grids differ in shape");
  valid_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double p = built_[i];
    if (std::isnan(p) || p == nodata) continue;
    if (p < 0.0 || p > 1.0)
      throw ValidationError("sector " + sector_id_ + ": built probability " + csv::format_double(p) +
                            " outside [0,1] at cell " + std::to_string(i));
    valid_[i] = 1;
  }
}

PixelGrid PixelGrid::from_rasters(std::string sector_id, const AsciiGrid& footprint, const AsciiGrid& built) {
  if (!footprint.same_shape(built))
    throw ValidationError("sector " + sector_id + ": footprint and probability rasters differ in shape");
  std::vector<std::uint8_t> mask(footprint.values.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    double v = footprint.values[i];
    mask[i] = (v != footprint.nodata && v > 0.5) ? 1 : 0;
  }
  PixelGrid g(std::move(sector_id), built.nrows, built.ncols, std::move(mask), built.values, built.nodata);
  g.xllcorner = built.xllcorner;
  g.yllcorner = built.yllcorner;
  g.cellsize = built.cellsize;
  return g;
}

std::size_t PixelGrid::valid_count() const { return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), 1)); }

std::size_t PixelGrid::footprint_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < built_.size(); ++i) n += footprint(i) ? 1 : 0;
  return n;
}

PixelSet select_pixels(const PixelGrid& grid, long long n_constraint) {
  PixelSet out;
  out.sector_id = grid.sector_id();
  if (n_constraint < 0) throw ValidationError("sector " + grid.sector_id() + ": negative pixel constraint");
  const auto valid = static_cast<long long>(grid.valid_count());
  if (n_constraint > valid)
    throw InfeasibleError("sector " + grid.sector_id() + ": constraint of " + std::to_string(n_constraint) +
                          " pixels exceeds " + std::to_string(valid) + " valid cells (deficit " +
                          std::to_string(n_constraint - valid) + ")");

  std::vector<std::size_t> fp, other;
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    if (!grid.valid(i)) continue;
    (grid.footprint(i) ? fp : other).push_back(i);
  }
  // Descending probability, row-major on ties (cells are already row-major).
  auto by_prob = [&](std::size_t a, std::size_t b) { return grid.probability(a) > grid.probability(b); };
  std::stable_sort(fp.begin(), fp.end(), by_prob);

  std::vector<std::size_t> chosen;
  const auto n_bldg = static_cast<long long>(fp.size());
  if (n_bldg >= n_constraint) {
    chosen.assign(fp.begin(), fp.begin() + n_constraint);
  } else {
    std::stable_sort(other.begin(), other.end(), by_prob);
    chosen = fp;
    chosen.insert(chosen.end(), other.begin(), other.begin() + (n_constraint - n_bldg));
  }
  out.threshold_used = chosen.empty() ? 1.0 : grid.probability(chosen.back());

  std::sort(chosen.begin(), chosen.end());
  out.pixels.reserve(chosen.size());
  for (std::size_t i : chosen)
    out.pixels.push_back({static_cast<int>(i / grid.ncols()), static_cast<int>(i % grid.ncols())});
  return out;
}

std::map<std::string, PixelGrid> parse_pixel_table(std::string_view text, const std::string& origin) {
  auto t = csv::Table::parse(text, origin);
  struct Cell {
    int row, col;
    std::uint8_t fp;
    double p;
  };
  std::map<std::string, std::vector<Cell>> cells;
  for (std::size_t r = 0; r < t.size(); ++r) {
    Cell c{static_cast<int>(t.integer(r, "row")), static_cast<int>(t.integer(r, "col")),
           static_cast<std::uint8_t>(t.number(r, "footprint") > 0.5 ? 1 : 0), t.number(r, "built_prob")};
    if (c.row < 0 || c.col < 0) throw ValidationError(origin + ": negative row/col at row " + std::to_string(r + 2));
    cells[t.at(r, "sector_id")].push_back(c);
  }
  std::map<std::string, PixelGrid> out;
  for (auto& [sector, list] : cells) {
    int nrows = 0, ncols = 0;
    for (const auto& c : list) {
      nrows = std::max(nrows, c.row + 1);
      ncols = std::max(ncols, c.col + 1);
    }
    const std::size_t n = static_cast<std::size_t>(nrows) * ncols;
    std::vector<std::uint8_t> fp(n, 0);
    std::vector<double> p(n, PixelGrid::kNoData);
    for (const auto& c : list) {
      const std::size_t i = static_cast<std::size_t>(c.row) * ncols + c.col;
      fp[i] = c.fp;
      p[i] = c.p;
    }
    out.emplace(sector, PixelGrid(sector, nrows, ncols, std::move(fp), std::move(p)));
  }
  return out;
}

std::map<std::string, PixelGrid> read_pixel_table(const std::filesystem::path& path) {
  return parse_pixel_table(csv::read_file(path), path.string());
}

std::string write_pixel_sets(const std::vector<PixelSet>& sets) {
  csv::Writer w({"sector_id", "row", "col", "threshold"});
  for (const auto& s : sets)
    for (const auto& p : s.pixels)
      w.row({s.sector_id, std::to_string(p.row), std::to_string(p.col), csv::format_double(s.threshold_used)});
  return w.str();
}

std::vector<PixelSet> parse_pixel_sets(std::string_view text, const std::string& origin) {
  auto t = csv::Table::parse(text, origin);
  std::vector<PixelSet> out;
  std::map<std::string, std::size_t> where;
  for (std::size_t r = 0; r < t.size(); ++r) {
    const auto& sector = t.at(r, "sector_id");
    auto it = where.find(sector);
    if (it == where.end()) {
      it = where.emplace(sector, out.size()).first;
      out.push_back({sector, {}, t.has_column("threshold") ? t.number(r, "threshold") : 1.0});
    }
    out[it->second].pixels.push_back({static_cast<int>(t.integer(r, "row")), static_cast<int>(t.integer(r, "col"))});
  }
  return out;
}

std::vector<PixelSet> read_pixel_sets(const std::filesystem::path& path) {
  return parse_pixel_sets(csv::read_file(path), path.string());
}

}  // namespace ccc
