#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccc/ascii_grid.hpp"
#include "ccc/matrix.hpp"
#include "ccc/pixel_selector.hpp"

namespace ccc {

inline constexpr std::array<std::string_view, 12> kBandNames = {"VV", "VH", "B2", "B3",  "B4",  "B5",
                                                               "B6", "B7", "B8", "B8A", "B11", "B12"};
inline constexpr std::size_t kFeatureCount = 14;

const std::vector<std::string>& feature_column_names();

// Per-sector normalized feature array: 12 log-scaled bands and the two
// location encodings, every column z-scored over the sector's pixels.
struct FeatureMatrix {
  std::string sector_id;
  std::vector<Pixel> pixels;  // row order of `values`
  Matrix values;              // |M| x 14
  std::vector<std::string> column_names = feature_column_names();

  std::size_t size() const { return pixels.size(); }
};

// ln(v - min(v) + 1)
std::vector<double> log_transform(std::span<const double> band_values);
// (v - mean) / population sd; all zeros when sd < 1e-12.
std::vector<double> zscore(std::span<const double> column);

// raw_bands is |M| x 12 in kBandNames order.
FeatureMatrix assemble_from_values(std::string sector_id, std::vector<Pixel> pixels, const Matrix& raw_bands);

using BandRasters = std::map<std::string, AsciiGrid, std::less<>>;
FeatureMatrix assemble(const BandRasters& bands, const PixelSet& pixel_set);

// Band rasters named <sector>_<BAND>.asc inside `dir`.
BandRasters read_band_rasters(const std::filesystem::path& dir, std::string_view sector_id);

// Band table CSV: sector_id,row,col,VV,VH,B2,...,B12
std::map<std::string, std::map<Pixel, std::array<double, 12>>> read_band_table(const std::filesystem::path& path);
FeatureMatrix assemble_from_table(const std::map<Pixel, std::array<double, 12>>& table, const PixelSet& pixel_set);

// features_<sector>.csv (the 14 named columns) and pixels_<sector>.csv (row,col).
void write_features(const std::filesystem::path& dir, const FeatureMatrix& fm);
FeatureMatrix read_features(const std::filesystem::path& dir, std::string_view sector_id);
// Every features_*.csv in the directory, sorted by sector id.
std::vector<FeatureMatrix> read_feature_dir(const std::filesystem::path& dir);

}  // namespace ccc
