#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ccc/ascii_grid.hpp"

namespace ccc {

struct Pixel {
  int row = 0;
  int col = 0;
  auto operator<=>(const Pixel&) const = default;
};

// Candidate building cells of one sector on the 10 m grid.
class PixelGrid {
 public:
  static constexpr double kNoData = -9999.0;

  PixelGrid() = default;
  // Validates dimensions and probability range; probability cells equal to
  // `nodata` (or NaN) are outside the sector.
  PixelGrid(std::string sector_id, int nrows, int ncols, std::vector<std::uint8_t> footprint,
            std::vector<double> built_probability, double nodata = kNoData);

  static PixelGrid from_rasters(std::string sector_id, const AsciiGrid& footprint, const AsciiGrid& built);

  const std::string& sector_id() const { return sector_id_; }
  int nrows() const { return nrows_; }
  int ncols() const { return ncols_; }
  std::size_t cell_count() const { return built_.size(); }
  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * ncols_ + col; }

  bool valid(std::size_t cell) const { return valid_[cell] != 0; }
  bool footprint(std::size_t cell) const { return footprint_[cell] != 0 && valid_[cell] != 0; }
  double probability(std::size_t cell) const { return built_[cell]; }
  std::size_t valid_count() const;
  std::size_t footprint_count() const;

  // Geo metadata carried through for raster export.
  double xllcorner = 0.0;
  double yllcorner = 0.0;
  double cellsize = 10.0;

 private:
  std::string sector_id_;
  int nrows_ = 0;
  int ncols_ = 0;
  std::vector<std::uint8_t> footprint_;
  std::vector<double> built_;
  std::vector<std::uint8_t> valid_;
};

struct PixelSet {
  std::string sector_id;
  std::vector<Pixel> pixels;  // row-major order
  double threshold_used = 1.0;
};

// Footprint cells topped up with (or cut down to) the highest-probability
// cells until exactly n_constraint cells remain. Ties on probability go to the
// earlier row-major cell. Throws InfeasibleError when too few valid cells.
PixelSet select_pixels(const PixelGrid& grid, long long n_constraint);

// Pixel-table CSV: sector_id,row,col,footprint,built_prob. Cells that are not
// listed are outside the sector.
std::map<std::string, PixelGrid> read_pixel_table(const std::filesystem::path& path);
std::map<std::string, PixelGrid> parse_pixel_table(std::string_view text, const std::string& origin = "<memory>");

// pixels.csv: sector_id,row,col,threshold
std::string write_pixel_sets(const std::vector<PixelSet>& sets);
std::vector<PixelSet> parse_pixel_sets(std::string_view text, const std::string& origin = "<memory>");
std::vector<PixelSet> read_pixel_sets(const std::filesystem::path& path);

}  // namespace ccc
