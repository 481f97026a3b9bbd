#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ccc {

enum class Settlement { urban, rural, any };
enum class Indicator { roof, wall, height, macro };

std::string_view to_string(Settlement s);
std::string_view to_string(Indicator i);
Settlement parse_settlement(std::string_view s);
Indicator parse_indicator(std::string_view s);

// The three clustered indicators, in latent-channel order.
inline constexpr std::array<Indicator, 3> kLatentIndicators = {Indicator::roof, Indicator::wall,
                                                              Indicator::height};
inline constexpr std::array<Indicator, 4> kAllIndicators = {Indicator::roof, Indicator::wall,
                                                           Indicator::height, Indicator::macro};

struct ClassShare {
  std::string name;
  double fraction = 0.0;
};

struct CensusRecord {
  std::string sector_id;
  long long urban_population = 0;
  long long rural_population = 0;
  long long private_households = 0;
  std::vector<ClassShare> wall_shares;
  std::vector<ClassShare> roof_shares;

  long long population() const { return urban_population + rural_population; }
  // Throws ValidationError (or DegenerateInputError for zero households).
  void validate() const;
};

std::vector<CensusRecord> read_census(const std::filesystem::path& path);
std::vector<CensusRecord> parse_census(std::string_view text, const std::string& origin = "<memory>");
std::string write_census(const std::vector<CensusRecord>& records);

enum class TableKind { wall_to_macro, macro_to_height, height_to_dwellings };

struct ConditionalRow {
  std::string source;
  Settlement settlement = Settlement::any;
  std::string target;
  double probability = 0.0;
  int dwellings_per_building = 0;  // height_to_dwellings only
};

class ConditionalTable {
 public:
  ConditionalTable() = default;
  // Validates group normalization, probability range and dwellings counts.
  ConditionalTable(TableKind kind, std::vector<ConditionalRow> rows);

  TableKind kind() const { return kind_; }
  const std::vector<ConditionalRow>& rows() const { return rows_; }

  // Rows for (source, settlement); rows tagged `any` are used when no row
  // carries the exact settlement. Empty when the source is not covered.
  std::vector<const ConditionalRow*> rows_for(std::string_view source, Settlement settlement) const;
  bool covers(std::string_view source, Settlement settlement) const;

  // Distinct sources and targets in order of first appearance.
  std::vector<std::string> sources() const;
  std::vector<std::string> targets() const;

  static ConditionalTable parse(std::string_view text, TableKind kind, const std::string& origin = "<memory>");
  static ConditionalTable read(const std::filesystem::path& path, TableKind kind);
  std::string serialize() const;

 private:
  TableKind kind_ = TableKind::wall_to_macro;
  std::vector<ConditionalRow> rows_;
};

struct ConditionalTables {
  ConditionalTable wall_macro;
  ConditionalTable macro_height;
  ConditionalTable height_dwellings;

  // Reads cond_wall_macro.csv, cond_macro_height.csv, cond_height_dwellings.csv.
  static ConditionalTables read(const std::filesystem::path& dir);
  void write(const std::filesystem::path& dir) const;

  std::vector<std::string> macro_classes() const;
  std::vector<std::string> height_classes() const;
};

// Expert tables relating wall material, macro-taxonomy, height and dwellings
// for Rwanda.
ConditionalTables default_tables();

// Census class lists (pre-reduced): 8 wall and 4 roof classes.
const std::vector<std::string>& default_wall_classes();
const std::vector<std::string>& default_roof_classes();

using ClassCounts = std::vector<std::pair<std::string, long long>>;

struct ConstraintSet {
  std::string sector_id;
  Settlement settlement = Settlement::urban;
  long long total_dwellings = 0;
  long long total_buildings = 0;
  // Indexed by Indicator (roof, wall, height, macro).
  std::array<ClassCounts, 4> building_counts;
  std::array<ClassCounts, 4> pixel_counts;

  const ClassCounts& buildings(Indicator i) const { return building_counts[static_cast<int>(i)]; }
  const ClassCounts& pixels(Indicator i) const { return pixel_counts[static_cast<int>(i)]; }
  long long pixel_total(Indicator i) const;
  long long building_total(Indicator i) const;
};

double compute_household_size(long long population, long long households, std::string_view sector_id = "");

struct Dwellings {
  double urban = 0.0;
  double rural = 0.0;
};
Dwellings compute_dwellings(long long urban_population, long long rural_population, double household_size);

// Largest-remainder apportionment of `total` by normalized shares; ties go to
// the lower index. Output sums exactly to total.
std::vector<long long> apportion(long long total, const std::vector<double>& shares);

// Largest-remainder rounding of real quotas to integers summing to `total`.
// Requires sum(floor(quotas)) <= total <= sum(floor(quotas)) + quotas.size().
std::vector<long long> round_quotas(const std::vector<double>& quotas, long long total);

// round(n * 0.6), half-up: a 100 m^2 pixel holds 100/60 buildings of 60 m^2.
long long buildings_to_pixels(long long n_buildings);
// round(n / 0.6), half-up.
long long pixels_to_buildings(long long n_pixels);

// Dwellings of one settlement type split wall -> macro -> height, each link
// by largest-remainder apportionment.
struct DwellingChain {
  std::vector<std::string> wall_classes, macro_classes, height_classes;
  long long total = 0;
  std::vector<long long> wall;        // per wall class
  std::vector<long long> wall_macro;  // wall x macro, row-major
  std::vector<long long> cells;       // wall x macro x height, row-major

  long long at(std::size_t w, std::size_t m, std::size_t h) const;
};

DwellingChain chain_dwellings(const CensusRecord& census, const ConditionalTables& tables, Settlement settlement,
                              long long total_dwellings);

struct SectorConstraints {
  ConstraintSet urban;
  ConstraintSet rural;
};

SectorConstraints derive_constraints(const CensusRecord& census, const ConditionalTables& tables);

// Long-format constraint file:
// sector_id,settlement_type,total_dwellings,indicator,class,buildings,pixels
std::string write_constraints(const std::vector<ConstraintSet>& sets);
std::vector<ConstraintSet> parse_constraints(std::string_view text, const std::string& origin = "<memory>");
std::vector<ConstraintSet> read_constraints(const std::filesystem::path& path);

// Per-class pixel targets of one sector summed over settlement types, in the
// class order of the first set seen for that sector.
ClassCounts sector_pixel_targets(const std::vector<ConstraintSet>& sets, std::string_view sector_id,
                                 Indicator indicator);
std::vector<std::string> constraint_sectors(const std::vector<ConstraintSet>& sets);

}  // namespace ccc
