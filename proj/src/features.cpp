#include "ccc/features.hpp"

#include <algorithm>
#include <cmath>

#include "ccc/csv.hpp"
#include "ccc/error.hpp"
#include "ccc/kernels.hpp"

namespace ccc {

const std::vector<std::string>& feature_column_names() {
  static const std::vector<std::string> kNames = [] {
    std::vector<std::string> v(kBandNames.begin(), kBandNames.end());
    v.emplace_back("row_norm");
    v.emplace_back("col_norm");
    return v;
  }();
  return kNames;
}

std::vector<double> log_transform(std::span<const double> band_values) {
  if (band_values.empty()) return {};
  const double lo = *std::min_element(band_values.begin(), band_values.end());
  std::vector<double> out(band_values.size());
  for (std::size_t i = 0; i < band_values.size(); ++i) out[i] = std::log(band_values[i] - lo + 1.0);
  return out;
}

std::vector<double> zscore(std::span<const double> column) {
  Matrix m(column.size(), 1, std::vector<double>(column.begin(), column.end()));
  kernels::serial::zscore_columns(m);
  return m.data();
}

FeatureMatrix assemble_from_values(std::string sector_id, std::vector<Pixel> pixels, const Matrix& raw_bands) {
  if (raw_bands.rows() != pixels.size() || raw_bands.cols() != kBandNames.size())
    throw std::invalid_argument("assemble_from_values: raw band matrix must be |M| x 12");
  FeatureMatrix fm;
  fm.sector_id = std::move(sector_id);
  fm.pixels = std::move(pixels);
  const std::size_t n = fm.pixels.size();
  fm.values = Matrix(n, kFeatureCount);
  for (std::size_t b = 0; b < kBandNames.size(); ++b) {
    for (std::size_t r = 0; r < n; ++r)
      if (!std::isfinite(raw_bands(r, b)))
        throw DataIntegrityError("sector " + fm.sector_id + ": non-finite " + std::string(kBandNames[b]) +
                                 " value at pixel (" + std::to_string(fm.pixels[r].row) + "," +
                                 std::to_string(fm.pixels[r].col) + ")");
    fm.values.set_column(b, log_transform(raw_bands.column(b)));
  }
  for (std::size_t r = 0; r < n; ++r) {
    fm.values(r, 12) = fm.pixels[r].row;
    fm.values(r, 13) = fm.pixels[r].col;
  }
  kernels::zscore_columns(fm.values);
  return fm;
}

FeatureMatrix assemble(const BandRasters& bands, const PixelSet& pixel_set) {
  Matrix raw(pixel_set.pixels.size(), kBandNames.size());
  for (std::size_t b = 0; b < kBandNames.size(); ++b) {
    auto it = bands.find(kBandNames[b]);
    if (it == bands.end())
      throw DataIntegrityError("sector " + pixel_set.sector_id + ": missing band " + std::string(kBandNames[b]));
    const auto& g = it->second;
    for (std::size_t r = 0; r < pixel_set.pixels.size(); ++r) {
      const auto& p = pixel_set.pixels[r];
      auto where = "sector " + pixel_set.sector_id + " pixel (" + std::to_string(p.row) + "," + std::to_string(p.col) +
                   ") band " + std::string(kBandNames[b]);
      if (p.row < 0 || p.col < 0 || p.row >= g.nrows || p.col >= g.ncols)
        throw DataIntegrityError(where + ": outside the raster");
      if (g.is_nodata(p.row, p.col)) throw DataIntegrityError(where + ": no-data value");
      raw(r, b) = g.at(p.row, p.col);
    }
  }
  return assemble_from_values(pixel_set.sector_id, pixel_set.pixels, raw);
}

BandRasters read_band_rasters(const std::filesystem::path& dir, std::string_view sector_id) {
  BandRasters out;
  for (auto band : kBandNames) {
    auto path = dir / (std::string(sector_id) + "_" + std::string(band) + ".asc");
    if (!std::filesystem::exists(path))
      throw DataIntegrityError("sector " + std::string(sector_id) + ": missing band raster " + path.string());
    out.emplace(std::string(band), AsciiGrid::read(path));
  }
  return out;
}

std::map<std::string, std::map<Pixel, std::array<double, 12>>> read_band_table(const std::filesystem::path& path) {
  auto t = csv::Table::read(path);
  std::map<std::string, std::map<Pixel, std::array<double, 12>>> out;
  for (std::size_t r = 0; r < t.size(); ++r) {
    std::array<double, 12> v{};
    for (std::size_t b = 0; b < kBandNames.size(); ++b) v[b] = t.number(r, kBandNames[b]);
    Pixel p{static_cast<int>(t.integer(r, "row")), static_cast<int>(t.integer(r, "col"))};
    out[t.at(r, "sector_id")][p] = v;
  }
  return out;
}

FeatureMatrix assemble_from_table(const std::map<Pixel, std::array<double, 12>>& table, const PixelSet& pixel_set) {
  Matrix raw(pixel_set.pixels.size(), kBandNames.size());
  for (std::size_t r = 0; r < pixel_set.pixels.size(); ++r) {
    const auto& p = pixel_set.pixels[r];
    auto it = table.find(p);
    if (it == table.end())
      throw DataIntegrityError("sector " + pixel_set.sector_id + ": no band values for pixel (" +
                               std::to_string(p.row) + "," + std::to_string(p.col) + ")");
    for (std::size_t b = 0; b < kBandNames.size(); ++b) raw(r, b) = it->second[b];
  }
  return assemble_from_values(pixel_set.sector_id, pixel_set.pixels, raw);
}

void write_features(const std::filesystem::path& dir, const FeatureMatrix& fm) {
  csv::Writer w(fm.column_names);
  for (std::size_t r = 0; r < fm.values.rows(); ++r) {
    std::vector<std::string> row;
    row.reserve(kFeatureCount);
    for (double v : fm.values.row(r)) row.push_back(csv::format_double(v));
    w.row(row);
  }
  w.save(dir / ("features_" + fm.sector_id + ".csv"));
  csv::Writer px({"row", "col"});
  for (const auto& p : fm.pixels) px.row({std::to_string(p.row), std::to_string(p.col)});
  px.save(dir / ("pixels_" + fm.sector_id + ".csv"));
}

FeatureMatrix read_features(const std::filesystem::path& dir, std::string_view sector_id) {
  const std::string sid(sector_id);
  auto t = csv::Table::read(dir / ("features_" + sid + ".csv"));
  if (t.header() != feature_column_names())
    throw ValidationError(t.origin() + ": header does not match the 14 feature columns");
  auto px = csv::Table::read(dir / ("pixels_" + sid + ".csv"));
  if (px.size() != t.size()) throw ValidationError(px.origin() + ": pixel count differs from feature rows");
  FeatureMatrix fm;
  fm.sector_id = sid;
  fm.values = Matrix(t.size(), kFeatureCount);
  for (std::size_t r = 0; r < t.size(); ++r) {
    for (std::size_t c = 0; c < kFeatureCount; ++c)
      fm.values(r, c) = csv::parse_double(t.rows()[r][c], t.origin() + " row " + std::to_string(r + 2));
    fm.pixels.push_back({static_cast<int>(px.integer(r, "row")), static_cast<int>(px.integer(r, "col"))});
  }
  return fm;
}

std::vector<FeatureMatrix> read_feature_dir(const std::filesystem::path& dir) {
  std::vector<std::string> sectors;
  if (!std::filesystem::is_directory(dir)) throw ValidationError("not a directory: " + dir.string());
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    auto name = e.path().filename().string();
    if (name.rfind("features_", 0) == 0 && e.path().extension() == ".csv")
      sectors.push_back(name.substr(9, name.size() - 9 - 4));
  }
  std::sort(sectors.begin(), sectors.end());
  std::vector<FeatureMatrix> out;
  for (const auto& s : sectors) out.push_back(read_features(dir, s));
  return out;
}

}  // namespace ccc
