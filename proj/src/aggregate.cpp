#include "ccc/aggregate.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "ccc/csv.hpp"
#include "ccc/error.hpp"

namespace ccc {

namespace {

constexpr std::array<const char*, 4> kClassColumns = {"roof_class", "wall_class", "height_class", "macro_class"};
constexpr std::string_view kAssignmentPrefix = "assignments_";

AdminLevel parse_level(std::string_view s) {
  if (s == "sector") return AdminLevel::sector;
  if (s == "district") return AdminLevel::district;
  if (s == "province") return AdminLevel::province;
  throw ValidationError("unknown admin level '" + std::string(s) + "'");
}

}  // namespace

std::string write_assignments(const AssignmentTable& table) {
  csv::Writer w({"row", "col", kClassColumns[0], kClassColumns[1], kClassColumns[2], kClassColumns[3]});
  for (std::size_t j = 0; j < table.size(); ++j)
    w.row({std::to_string(table.pixels[j].row), std::to_string(table.pixels[j].col), table.classes[0][j],
           table.classes[1][j], table.classes[2][j], table.classes[3][j]});
  return w.str();
}

void save_assignments(const std::filesystem::path& dir, const AssignmentTable& table) {
  csv::write_file(dir / (std::string(kAssignmentPrefix) + table.sector_id + ".csv"), write_assignments(table));
}

AssignmentTable parse_assignments(std::string_view text, std::string sector_id, const std::string& origin) {
  auto t = csv::Table::parse(text, origin);
  AssignmentTable a;
  a.sector_id = std::move(sector_id);
  for (std::size_t r = 0; r < t.size(); ++r) {
    a.pixels.push_back({static_cast<int>(t.integer(r, "row")), static_cast<int>(t.integer(r, "col"))});
    for (std::size_t i = 0; i < 4; ++i) {
      // macro_class is optional for assignments produced without tables
      a.classes[i].push_back(i == 3 && !t.has_column(kClassColumns[i]) ? std::string() : t.at(r, kClassColumns[i]));
    }
  }
  return a;
}

std::vector<AssignmentTable> read_assignment_dir(const std::filesystem::path& dir) {
  std::vector<std::pair<std::string, std::filesystem::path>> files;
  if (!std::filesystem::is_directory(dir)) throw ValidationError("not a directory: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.starts_with(kAssignmentPrefix) && name.ends_with(".csv"))
      files.emplace_back(name.substr(kAssignmentPrefix.size(), name.size() - kAssignmentPrefix.size() - 4),
                         entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<AssignmentTable> out;
  for (const auto& [sector, path] : files)
    out.push_back(parse_assignments(csv::read_file(path), sector, path.string()));
  return out;
}

std::vector<HierarchyEntry> parse_hierarchy(std::string_view text, const std::string& origin) {
  auto t = csv::Table::parse(text, origin);
  std::vector<HierarchyEntry> out;
  for (std::size_t r = 0; r < t.size(); ++r) {
    HierarchyEntry e{t.at(r, "sector_id"), t.at(r, "district"), t.at(r, "province")};
    for (const auto& prev : out)
      if (prev.sector_id == e.sector_id)
        throw DataIntegrityError(origin + ": sector " + e.sector_id + " listed twice");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<HierarchyEntry> read_hierarchy(const std::filesystem::path& path) {
  return parse_hierarchy(csv::read_file(path), path.string());
}

std::string write_hierarchy(const std::vector<HierarchyEntry>& entries) {
  csv::Writer w({"sector_id", "district", "province"});
  for (const auto& e : entries) w.row({e.sector_id, e.district, e.province});
  return w.str();
}

std::string_view to_string(AdminLevel level) {
  switch (level) {
    case AdminLevel::sector: return "sector";
    case AdminLevel::district: return "district";
    case AdminLevel::province: return "province";
  }
  return "sector";
}

std::vector<SummaryRow> aggregate(const std::vector<AssignmentTable>& assignments,
                                  const std::vector<HierarchyEntry>& hierarchy) {
  using Key = std::tuple<int, std::string, int, std::string>;  // level, name, indicator, class
  std::map<Key, std::pair<long long, long long>> acc;

  for (const auto& a : assignments) {
    auto it = std::find_if(hierarchy.begin(), hierarchy.end(),
                           [&](const HierarchyEntry& e) { return e.sector_id == a.sector_id; });
    if (it == hierarchy.end()) throw SchemaError("sector " + a.sector_id + " is not in the admin hierarchy");
    for (int i = 0; i < 4; ++i) {
      std::map<std::string, long long> px;
      for (const auto& c : a.classes[static_cast<std::size_t>(i)])
        if (!c.empty()) ++px[c];
      for (const auto& [cls, n] : px) {
        const long long b = pixels_to_buildings(n);
        for (const auto& [level, name] : {std::pair{AdminLevel::sector, it->sector_id},
                                          std::pair{AdminLevel::district, it->district},
                                          std::pair{AdminLevel::province, it->province}}) {
          auto& slot = acc[{static_cast<int>(level), name, i, cls}];
          slot.first += n;
          slot.second += b;
        }
      }
    }
  }
  std::vector<SummaryRow> out;
  out.reserve(acc.size());
  for (const auto& [key, v] : acc) {
    const auto& [level, name, ind, cls] = key;
    out.push_back({static_cast<AdminLevel>(level), name, static_cast<Indicator>(ind), cls, v.first, v.second});
  }
  return out;
}

std::string write_summary(const std::vector<SummaryRow>& rows) {
  csv::Writer w({"level", "name", "indicator", "class", "pixels", "buildings"});
  for (const auto& r : rows)
    w.row({std::string(to_string(r.level)), r.name, std::string(to_string(r.indicator)), r.class_name,
           std::to_string(r.pixels), std::to_string(r.buildings)});
  return w.str();
}

std::vector<SummaryRow> parse_summary(std::string_view text, const std::string& origin) {
  auto t = csv::Table::parse(text, origin);
  std::vector<SummaryRow> out;
  for (std::size_t r = 0; r < t.size(); ++r)
    out.push_back({parse_level(t.at(r, "level")), t.at(r, "name"), parse_indicator(t.at(r, "indicator")),
                   t.at(r, "class"), t.integer(r, "pixels"), t.integer(r, "buildings")});
  return out;
}

AsciiGrid class_raster(const AssignmentTable& table, Indicator indicator, const std::vector<std::string>& class_order,
                       const AsciiGrid& like) {
  AsciiGrid g = like;
  std::fill(g.values.begin(), g.values.end(), g.nodata);
  const auto& names = table.of(indicator);
  for (std::size_t j = 0; j < table.size(); ++j) {
    const auto& p = table.pixels[j];
    if (p.row < 0 || p.row >= g.nrows || p.col < 0 || p.col >= g.ncols)
      throw DataIntegrityError("sector " + table.sector_id + ": pixel (" + std::to_string(p.row) + "," +
                               std::to_string(p.col) + ") outside the grid");
    auto it = std::find(class_order.begin(), class_order.end(), names[j]);
    if (it == class_order.end()) throw SchemaError("class '" + names[j] + "' missing from the raster legend");
    g.at(p.row, p.col) = static_cast<double>(it - class_order.begin());
  }
  return g;
}

}  // namespace ccc
