#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ccc/ascii_grid.hpp"
#include "ccc/census.hpp"
#include "ccc/pixel_selector.hpp"

namespace ccc {

// Per-pixel class names for one sector, indexed by Indicator.
struct AssignmentTable {
  std::string sector_id;
  std::vector<Pixel> pixels;
  std::array<std::vector<std::string>, 4> classes;  // roof, wall, height, macro

  std::size_t size() const { return pixels.size(); }
  const std::vector<std::string>& of(Indicator i) const { return classes[static_cast<int>(i)]; }
};

// assignments_<sector>.csv: row,col,roof_class,wall_class,height_class,macro_class
std::string write_assignments(const AssignmentTable& table);
void save_assignments(const std::filesystem::path& dir, const AssignmentTable& table);
AssignmentTable parse_assignments(std::string_view text, std::string sector_id, const std::string& origin = "<memory>");
// Every assignments_*.csv in the directory, sorted by sector id.
std::vector<AssignmentTable> read_assignment_dir(const std::filesystem::path& dir);

struct HierarchyEntry {
  std::string sector_id;
  std::string district;
  std::string province;
};

// hierarchy.csv: sector_id,district,province
std::vector<HierarchyEntry> parse_hierarchy(std::string_view text, const std::string& origin = "<memory>");
std::vector<HierarchyEntry> read_hierarchy(const std::filesystem::path& path);
std::string write_hierarchy(const std::vector<HierarchyEntry>& entries);

enum class AdminLevel { sector, district, province };
std::string_view to_string(AdminLevel level);

struct SummaryRow {
  AdminLevel level = AdminLevel::sector;
  std::string name;
  Indicator indicator = Indicator::roof;
  std::string class_name;
  long long pixels = 0;
  long long buildings = 0;
};

// Pixel and building counts per class at every level. Buildings are
// converted from pixels per sector and summed upward, so both columns are
// additive. Throws SchemaError for sectors missing from the hierarchy.
std::vector<SummaryRow> aggregate(const std::vector<AssignmentTable>& assignments,
                                  const std::vector<HierarchyEntry>& hierarchy);

// summary.csv: level,name,indicator,class,pixels,buildings
std::string write_summary(const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> parse_summary(std::string_view text, const std::string& origin = "<memory>");

// Class index raster for one indicator on the grid of `like`; cells outside
// the assignment are no-data. Class indices follow `class_order`.
AsciiGrid class_raster(const AssignmentTable& table, Indicator indicator, const std::vector<std::string>& class_order,
                       const AsciiGrid& like);

}  // namespace ccc
