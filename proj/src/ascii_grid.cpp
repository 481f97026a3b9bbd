#include "ccc/ascii_grid.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "ccc/csv.hpp"
#include "ccc/error.hpp"

namespace ccc {

AsciiGrid AsciiGrid::parse(std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  AsciiGrid g;
  std::string key, token;
  int header_lines = 0;
  // Header keys are case-insensitive; NODATA_value is optional.
  while (header_lines < 6) {
    auto pos = in.tellg();
    if (!(in >> key)) break;
    std::string lower = key;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower != "ncols" && lower != "nrows" && lower != "xllcorner" && lower != "yllcorner" &&
        lower != "xllcenter" && lower != "yllcenter" && lower != "cellsize" && lower != "nodata_value") {
      in.clear();
      in.seekg(pos);
      break;
    }
    if (!(in >> token)) throw ValidationError(origin + ": header key '" + key + "' without value");
    double v = csv::parse_double(token, origin + " header " + key);
    if (lower == "ncols") g.ncols = static_cast<int>(v);
    else if (lower == "nrows") g.nrows = static_cast<int>(v);
    else if (lower == "xllcorner" || lower == "xllcenter") g.xllcorner = v;
    else if (lower == "yllcorner" || lower == "yllcenter") g.yllcorner = v;
    else if (lower == "cellsize") g.cellsize = v;
    else g.nodata = v;
    ++header_lines;
  }
  if (g.ncols <= 0 || g.nrows <= 0) throw ValidationError(origin + ": missing or non-positive ncols/nrows");
  const std::size_t n = static_cast<std::size_t>(g.ncols) * static_cast<std::size_t>(g.nrows);
  g.values.reserve(n);
  while (in >> token) g.values.push_back(csv::parse_double(token, origin));
  if (g.values.size() != n)
    throw ValidationError(origin + ": expected " + std::to_string(n) + " values, found " +
                          std::to_string(g.values.size()));
  return g;
}

AsciiGrid AsciiGrid::read(const std::filesystem::path& path) { return parse(csv::read_file(path), path.string()); }

std::string AsciiGrid::serialize() const {
  std::string out;
  out += "ncols " + std::to_string(ncols) + "\n";
  out += "nrows " + std::to_string(nrows) + "\n";
  out += "xllcorner " + csv::format_double(xllcorner) + "\n";
  out += "yllcorner " + csv::format_double(yllcorner) + "\n";
  out += "cellsize " + csv::format_double(cellsize) + "\n";
  out += "NODATA_value " + csv::format_double(nodata) + "\n";
  for (int r = 0; r < nrows; ++r) {
    for (int c = 0; c < ncols; ++c) {
      if (c) out.push_back(' ');
      out += csv::format_double(at(r, c));
    }
    out.push_back('\n');
  }
  return out;
}

void AsciiGrid::write(const std::filesystem::path& path) const { csv::write_file(path, serialize()); }

}  // namespace ccc
