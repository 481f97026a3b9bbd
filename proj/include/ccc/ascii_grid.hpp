#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ccc {

// ESRI ASCII raster: six header lines then nrows lines of ncols values,
// first line is the northernmost row.
struct AsciiGrid {
  int ncols = 0;
  int nrows = 0;
  double xllcorner = 0.0;
  double yllcorner = 0.0;
  double cellsize = 10.0;
  double nodata = -9999.0;
  std::vector<double> values;  // row-major, size nrows * ncols

  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * ncols + col]; }
  double& at(int row, int col) { return values[static_cast<std::size_t>(row) * ncols + col]; }
  bool is_nodata(int row, int col) const { return at(row, col) == nodata; }
  bool same_shape(const AsciiGrid& other) const { return ncols == other.ncols && nrows == other.nrows; }

  static AsciiGrid parse(std::string_view text, const std::string& origin = "<memory>");
  static AsciiGrid read(const std::filesystem::path& path);
  std::string serialize() const;
  void write(const std::filesystem::path& path) const;
};

}  // namespace ccc
