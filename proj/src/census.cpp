#include "ccc/census.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ccc/csv.hpp"
#include "ccc/error.hpp"

namespace ccc {

namespace {

constexpr double kShareTolerance = 1e-9;
constexpr double kPixelsPerBuilding = 60.0 / 100.0;

std::string table_file(TableKind kind) {
  switch (kind) {
    case TableKind::wall_to_macro: return "cond_wall_macro.csv";
    case TableKind::macro_to_height: return "cond_macro_height.csv";
    case TableKind::height_to_dwellings: return "cond_height_dwellings.csv";
  }
  return {};
}

void check_shares(const std::vector<ClassShare>& shares, const std::string& what, const std::string& sector) {
  double sum = 0.0;
  for (const auto& s : shares) {
    if (!(s.fraction >= 0.0 && s.fraction <= 1.0))
      throw ValidationError("sector " + sector + ": " + what + " share '" + s.name + "' outside [0,1]");
    sum += s.fraction;
  }
  if (std::abs(sum - 1.0) > kShareTolerance)
    throw ValidationError("sector " + sector + ": " + what + " shares sum to " + csv::format_double(sum) +
                          ", expected 1");
}

long long round_half_up(double v) { return static_cast<long long>(std::floor(v + 0.5)); }

std::vector<double> fractions(const std::vector<ClassShare>& shares) {
  std::vector<double> out;
  out.reserve(shares.size());
  for (const auto& s : shares) out.push_back(s.fraction);
  return out;
}

template <class Rows>
std::vector<double> probabilities(const Rows& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto* r : rows) out.push_back(r->probability);
  return out;
}

std::size_t index_of(const std::vector<std::string>& names, std::string_view name) {
  auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? names.size() : static_cast<std::size_t>(it - names.begin());
}

ClassCounts zip_counts(const std::vector<std::string>& names, const std::vector<long long>& counts) {
  ClassCounts out;
  out.reserve(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) out.emplace_back(names[i], counts[i]);
  return out;
}

// Half-up pixels per class, then the residual against `target_total` is
// spread over the classes whose rounding moved them furthest from the quota.
std::vector<long long> reconcile_pixels(const ClassCounts& buildings, std::optional<long long> target_total) {
  std::vector<double> quota;
  std::vector<long long> px;
  for (const auto& [name, b] : buildings) {
    quota.push_back(static_cast<double>(b) * kPixelsPerBuilding);
    px.push_back(buildings_to_pixels(b));
  }
  if (!target_total) return px;
  long long residual = *target_total - std::accumulate(px.begin(), px.end(), 0LL);
  std::vector<std::size_t> order(px.size());
  std::iota(order.begin(), order.end(), 0);
  while (residual != 0) {
    if (residual > 0) {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return (quota[a] - px[a]) > (quota[b] - px[b]);
      });
      for (std::size_t i : order) {
        if (residual == 0) break;
        ++px[i];
        --residual;
      }
    } else {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return (px[a] - quota[a]) > (px[b] - quota[b]);
      });
      bool moved = false;
      for (std::size_t i : order) {
        if (residual == 0) break;
        if (px[i] == 0) continue;
        --px[i];
        ++residual;
        moved = true;
      }
      if (!moved) throw std::logic_error("reconcile_pixels: cannot remove residual");
    }
  }
  return px;
}

}  // namespace

std::string_view to_string(Settlement s) {
  switch (s) {
    case Settlement::urban: return "urban";
    case Settlement::rural: return "rural";
    case Settlement::any: return "any";
  }
  return "any";
}

std::string_view to_string(Indicator i) {
  switch (i) {
    case Indicator::roof: return "roof";
    case Indicator::wall: return "wall";
    case Indicator::height: return "height";
    case Indicator::macro: return "macro";
  }
  return "roof";
}

Settlement parse_settlement(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "urban") return Settlement::urban;
  if (lower == "rural") return Settlement::rural;
  if (lower == "any" || lower.empty()) return Settlement::any;
  throw ValidationError("unknown settlement type '" + std::string(s) + "'");
}

Indicator parse_indicator(std::string_view s) {
  if (s == "roof") return Indicator::roof;
  if (s == "wall") return Indicator::wall;
  if (s == "height") return Indicator::height;
  if (s == "macro") return Indicator::macro;
  throw ValidationError("unknown indicator '" + std::string(s) + "'");
}

void CensusRecord::validate() const {
  if (urban_population < 0 || rural_population < 0 || private_households < 0)
    throw ValidationError("sector " + sector_id + ": negative count");
  if (private_households < 1)
    throw DegenerateInputError("sector " + sector_id + ": private household count is zero");
  check_shares(wall_shares, "wall", sector_id);
  check_shares(roof_shares, "roof", sector_id);
}

std::vector<CensusRecord> parse_census(std::string_view text, const std::string& origin) {
  auto table = csv::Table::parse(text, origin);
  std::vector<std::pair<std::size_t, std::string>> wall_cols, roof_cols;
  for (std::size_t c = 0; c < table.header().size(); ++c) {
    const auto& h = table.header()[c];
    if (h.rfind("wall_", 0) == 0) wall_cols.emplace_back(c, h.substr(5));
    if (h.rfind("roof_", 0) == 0) roof_cols.emplace_back(c, h.substr(5));
  }
  if (wall_cols.empty() || roof_cols.empty()) throw ValidationError(origin + ": no wall_* or roof_* columns");

  std::vector<CensusRecord> out;
  for (std::size_t r = 0; r < table.size(); ++r) {
    CensusRecord rec;
    rec.sector_id = table.at(r, "sector_id");
    rec.urban_population = table.integer(r, "urban_pop");
    rec.rural_population = table.integer(r, "rural_pop");
    rec.private_households = table.integer(r, "households");
    const auto& row = table.rows()[r];
    for (const auto& [c, name] : wall_cols)
      rec.wall_shares.push_back({name, csv::parse_double(row[c], origin + " " + table.header()[c])});
    for (const auto& [c, name] : roof_cols)
      rec.roof_shares.push_back({name, csv::parse_double(row[c], origin + " " + table.header()[c])});
    rec.validate();
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<CensusRecord> read_census(const std::filesystem::path& path) {
  return parse_census(csv::read_file(path), path.string());
}

std::string write_census(const std::vector<CensusRecord>& records) {
  std::vector<std::string> header = {"sector_id", "urban_pop", "rural_pop", "households"};
  if (records.empty()) return csv::Writer(header).str();
  for (const auto& s : records.front().wall_shares) header.push_back("wall_" + s.name);
  for (const auto& s : records.front().roof_shares) header.push_back("roof_" + s.name);
  csv::Writer w(header);
  for (const auto& rec : records) {
    if (rec.wall_shares.size() != records.front().wall_shares.size() ||
        rec.roof_shares.size() != records.front().roof_shares.size())
      throw ValidationError("write_census: records disagree on class lists");
    std::vector<std::string> row = {rec.sector_id, std::to_string(rec.urban_population),
                                    std::to_string(rec.rural_population), std::to_string(rec.private_households)};
    for (const auto& s : rec.wall_shares) row.push_back(csv::format_double(s.fraction));
    for (const auto& s : rec.roof_shares) row.push_back(csv::format_double(s.fraction));
    w.row(row);
  }
  return w.str();
}

ConditionalTable::ConditionalTable(TableKind kind, std::vector<ConditionalRow> rows)
    : kind_(kind), rows_(std::move(rows)) {
  std::map<std::pair<std::string, Settlement>, double> sums;
  std::vector<std::pair<std::string, Settlement>> order;
  for (const auto& r : rows_) {
    if (!(r.probability >= 0.0 && r.probability <= 1.0))
      throw ValidationError("conditional row " + r.source + " -> " + r.target + ": probability outside [0,1]");
    if (kind_ == TableKind::height_to_dwellings && r.dwellings_per_building < 1)
      throw ValidationError("conditional row " + r.source + " -> " + r.target + ": dwellings_per_building < 1");
    auto key = std::make_pair(r.source, r.settlement);
    if (!sums.count(key)) order.push_back(key);
    sums[key] += r.probability;
  }
  for (const auto& key : order) {
    if (std::abs(sums[key] - 1.0) > kShareTolerance)
      throw ValidationError("conditional rows for " + key.first + " (" + std::string(to_string(key.second)) +
                            ") sum to " + csv::format_double(sums[key]));
  }
}

std::vector<const ConditionalRow*> ConditionalTable::rows_for(std::string_view source, Settlement settlement) const {
  std::vector<const ConditionalRow*> exact, any;
  for (const auto& r : rows_) {
    if (r.source != source) continue;
    if (r.settlement == settlement) exact.push_back(&r);
    else if (r.settlement == Settlement::any) any.push_back(&r);
  }
  return exact.empty() ? any : exact;
}

bool ConditionalTable::covers(std::string_view source, Settlement settlement) const {
  return !rows_for(source, settlement).empty();
}

std::vector<std::string> ConditionalTable::sources() const {
  std::vector<std::string> out;
  for (const auto& r : rows_)
    if (std::find(out.begin(), out.end(), r.source) == out.end()) out.push_back(r.source);
  return out;
}

std::vector<std::string> ConditionalTable::targets() const {
  std::vector<std::string> out;
  for (const auto& r : rows_)
    if (std::find(out.begin(), out.end(), r.target) == out.end()) out.push_back(r.target);
  return out;
}

ConditionalTable ConditionalTable::parse(std::string_view text, TableKind kind, const std::string& origin) {
  auto table = csv::Table::parse(text, origin);
  bool with_dwellings = table.has_column("dwellings_per_building");
  if (kind == TableKind::height_to_dwellings && !with_dwellings)
    throw ValidationError(origin + ": height->dwellings table needs a dwellings_per_building column");
  std::vector<ConditionalRow> rows;
  for (std::size_t r = 0; r < table.size(); ++r) {
    ConditionalRow row;
    row.source = table.at(r, "source");
    row.settlement = parse_settlement(table.at(r, "settlement_type"));
    row.target = table.at(r, "target");
    row.probability = table.number(r, "probability");
    if (with_dwellings && !table.at(r, "dwellings_per_building").empty())
      row.dwellings_per_building = static_cast<int>(table.integer(r, "dwellings_per_building"));
    rows.push_back(std::move(row));
  }
  return ConditionalTable(kind, std::move(rows));
}

ConditionalTable ConditionalTable::read(const std::filesystem::path& path, TableKind kind) {
  return parse(csv::read_file(path), kind, path.string());
}

std::string ConditionalTable::serialize() const {
  bool dw = kind_ == TableKind::height_to_dwellings;
  std::vector<std::string> header = {"source", "settlement_type", "target", "probability"};
  if (dw) header.push_back("dwellings_per_building");
  csv::Writer w(header);
  for (const auto& r : rows_) {
    std::vector<std::string> row = {r.source, std::string(to_string(r.settlement)), r.target,
                                    csv::format_double(r.probability)};
    if (dw) row.push_back(std::to_string(r.dwellings_per_building));
    w.row(row);
  }
  return w.str();
}

ConditionalTables ConditionalTables::read(const std::filesystem::path& dir) {
  return {ConditionalTable::read(dir / table_file(TableKind::wall_to_macro), TableKind::wall_to_macro),
          ConditionalTable::read(dir / table_file(TableKind::macro_to_height), TableKind::macro_to_height),
          ConditionalTable::read(dir / table_file(TableKind::height_to_dwellings), TableKind::height_to_dwellings)};
}

void ConditionalTables::write(const std::filesystem::path& dir) const {
  csv::write_file(dir / table_file(TableKind::wall_to_macro), wall_macro.serialize());
  csv::write_file(dir / table_file(TableKind::macro_to_height), macro_height.serialize());
  csv::write_file(dir / table_file(TableKind::height_to_dwellings), height_dwellings.serialize());
}

std::vector<std::string> ConditionalTables::macro_classes() const {
  auto out = macro_height.sources();
  for (const auto& t : wall_macro.targets())
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  return out;
}

std::vector<std::string> ConditionalTables::height_classes() const {
  auto out = height_dwellings.sources();
  for (const auto& t : macro_height.targets())
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  return out;
}

const std::vector<std::string>& default_wall_classes() {
  static const std::vector<std::string> kWalls = {"Wood with mud", "Sun-dried bricks", "Cement blocks",
                                                  "Burnt bricks",  "Stone",            "Concrete",
                                                  "Timber",        "Others"};
  return kWalls;
}

const std::vector<std::string>& default_roof_classes() {
  static const std::vector<std::string> kRoofs = {"Iron Sheets", "Local, Industrial, and Asbestos Tiles",
                                                  "Concrete", "Grass"};
  return kRoofs;
}

ConditionalTables default_tables() {
  using S = Settlement;
  std::vector<ConditionalRow> wm = {
      {"Wood with mud", S::urban, "W+WWD/LWAL", 1.0},
      {"Sun-dried bricks", S::urban, "MUR+ADO+MOC/LWAL", 0.3},
      {"Sun-dried bricks", S::urban, "MUR+CL+MOC/LWAL", 0.2},
      {"Sun-dried bricks", S::urban, "MUR+ADO/LWAL", 0.3},
      {"Sun-dried bricks", S::urban, "MUR+CL/LWAL", 0.2},
      {"Others", S::urban, "MATO", 1.0},
      {"Cement blocks", S::urban, "MUR+CB/LWAL", 0.8},
      {"Cement blocks", S::urban, "MCF+CB/LWAL", 0.2},
      {"Concrete", S::urban, "CR/LFINF", 0.8},
      {"Concrete", S::urban, "CR/LWAL", 0.2},
      {"Stone", S::urban, "MUR+STDRE+MOC/LWAL", 0.5},
      {"Stone", S::urban, "MUR+STDRE/LWAL", 0.5},
      {"Timber", S::urban, "W/LWAL", 1.0},
      {"Burnt bricks", S::urban, "CR/LFINF", 0.25},
      {"Burnt bricks", S::urban, "MUR+CL+MOC/LWAL", 0.25},
      {"Burnt bricks", S::urban, "MUR+CL/LWAL", 0.412},
      {"Burnt bricks", S::urban, "MCF+CL/LWAL", 0.088},
      {"Wood with mud", S::rural, "W+WWD/LWAL", 1.0},
      {"Sun-dried bricks", S::rural, "MUR+ADO+MOC/LWAL", 0.4},
      {"Sun-dried bricks", S::rural, "MUR+CL+MOC/LWAL", 0.1},
      {"Sun-dried bricks", S::rural, "MUR+ADO/LWAL", 0.4},
      {"Sun-dried bricks", S::rural, "MUR+CL/LWAL", 0.1},
      {"Others", S::rural, "MATO", 1.0},
      {"Cement blocks", S::rural, "MUR+CB/LWAL", 1.0},
      {"Concrete", S::rural, "CR/LFINF", 0.5},
      {"Concrete", S::rural, "CR/LWAL", 0.5},
      {"Stone", S::rural, "MUR+STRUB+MOC/LWAL", 0.5},
      {"Stone", S::rural, "MUR+STRUB/LWAL", 0.5},
      {"Timber", S::rural, "W/LWAL", 1.0},
      {"Burnt bricks", S::rural, "MUR+CL+MOC/LWAL", 0.5},
      {"Burnt bricks", S::rural, "MUR+CL/LWAL", 0.5},
  };

  std::vector<ConditionalRow> mh;
  auto add = [&](const std::string& macro, std::vector<std::pair<std::string, double>> split) {
    for (auto& [h, p] : split) mh.push_back({macro, S::any, h, p});
  };
  const std::vector<std::pair<std::string, double>> concrete = {
      {"H:1", 0.1}, {"H:2", 0.35}, {"H:3", 0.35}, {"HBET:4-7", 0.15}, {"HBET:8+", 0.05}};
  const std::vector<std::pair<std::string, double>> confined = {{"H:1", 0.45}, {"H:2", 0.45}, {"HBET:3-6", 0.1}};
  const std::vector<std::pair<std::string, double>> masonry = {{"H:1", 0.475}, {"H:2", 0.475}, {"HBET:3-6", 0.05}};
  add("CR/LFINF", concrete);
  add("CR/LWAL", concrete);
  add("MATO", {{"H:1", 1.0}});
  add("MCF+CB/LWAL", confined);
  add("MCF+CL/LWAL", confined);
  for (const char* m : {"MUR+ADO+MOC/LWAL", "MUR+ADO/LWAL", "MUR+CB/LWAL", "MUR+CL+MOC/LWAL", "MUR+CL/LWAL",
                        "MUR+STDRE+MOC/LWAL", "MUR+STDRE/LWAL", "MUR+STRUB+MOC/LWAL", "MUR+STRUB/LWAL"})
    add(m, masonry);
  add("W+WWD/LWAL", {{"H:1", 0.7}, {"H:2", 0.3}});
  add("W/LWAL", {{"H:1", 0.4}, {"H:2", 0.4}, {"H:3", 0.2}});

  std::vector<ConditionalRow> hd = {
      {"H:1", S::any, "Dwelling-house", 1.0, 1},
      {"H:2", S::any, "Dwelling-house", 0.95, 1},
      {"H:2", S::any, "Townhouse", 0.05, 2},
      {"H:3", S::any, "Dwelling-house", 0.7, 1},
      {"H:3", S::any, "Townhouse", 0.2, 3},
      {"H:3", S::any, "Apartment/Flat", 0.1, 8},
      {"HBET:3-6", S::any, "Townhouse", 0.25, 4},
      {"HBET:3-6", S::any, "Apartment/Flat", 0.75, 12},
      {"HBET:4-7", S::any, "Apartment/Flat", 1.0, 12},
      {"HBET:8+", S::any, "Apartment/Flat", 1.0, 16},
  };

  return {ConditionalTable(TableKind::wall_to_macro, std::move(wm)),
          ConditionalTable(TableKind::macro_to_height, std::move(mh)),
          ConditionalTable(TableKind::height_to_dwellings, std::move(hd))};
}

long long ConstraintSet::pixel_total(Indicator i) const {
  long long s = 0;
  for (const auto& [name, n] : pixels(i)) s += n;
  return s;
}

long long ConstraintSet::building_total(Indicator i) const {
  long long s = 0;
  for (const auto& [name, n] : buildings(i)) s += n;
  return s;
}

double compute_household_size(long long population, long long households, std::string_view sector_id) {
  if (households < 1)
    throw DegenerateInputError("sector " + std::string(sector_id) + ": private household count is zero");
  return static_cast<double>(population) / static_cast<double>(households);
}

Dwellings compute_dwellings(long long urban_population, long long rural_population, double household_size) {
  if (!(household_size > 0.0)) throw DegenerateInputError("household size must be positive");
  return {static_cast<double>(urban_population) / household_size,
          static_cast<double>(rural_population) / household_size};
}

std::vector<long long> round_quotas(const std::vector<double>& quotas, long long total) {
  std::vector<long long> out(quotas.size());
  std::vector<double> rem(quotas.size());
  long long assigned = 0;
  for (std::size_t i = 0; i < quotas.size(); ++i) {
    double f = std::floor(quotas[i]);
    out[i] = static_cast<long long>(f);
    rem[i] = quotas[i] - f;
    assigned += out[i];
  }
  long long left = total - assigned;
  if (left < 0 || left > static_cast<long long>(quotas.size()))
    throw std::logic_error("round_quotas: quotas do not bracket the total");
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (long long i = 0; i < left; ++i) ++out[order[static_cast<std::size_t>(i)]];
  return out;
}

std::vector<long long> apportion(long long total, const std::vector<double>& shares) {
  if (total < 0) throw ValidationError("apportion: negative total");
  if (shares.empty()) {
    if (total == 0) return {};
    throw ValidationError("apportion: no shares for a positive total");
  }
  double sum = 0.0;
  for (double s : shares) {
    if (!(s >= 0.0)) throw ValidationError("apportion: negative share");
    sum += s;
  }
  if (std::abs(sum - 1.0) > kShareTolerance)
    throw ValidationError("apportion: shares sum to " + csv::format_double(sum) + ", expected 1");
  std::vector<double> quotas(shares.size());
  for (std::size_t i = 0; i < shares.size(); ++i) quotas[i] = static_cast<double>(total) * shares[i];
  return round_quotas(quotas, total);
}

long long buildings_to_pixels(long long n_buildings) {
  return round_half_up(static_cast<double>(n_buildings) * kPixelsPerBuilding);
}

long long pixels_to_buildings(long long n_pixels) {
  return round_half_up(static_cast<double>(n_pixels) / kPixelsPerBuilding);
}

long long DwellingChain::at(std::size_t w, std::size_t m, std::size_t h) const {
  return cells[(w * macro_classes.size() + m) * height_classes.size() + h];
}

DwellingChain chain_dwellings(const CensusRecord& census, const ConditionalTables& tables, Settlement settlement,
                              long long total_dwellings) {
  DwellingChain c;
  c.total = total_dwellings;
  c.macro_classes = tables.macro_classes();
  c.height_classes = tables.height_classes();
  for (const auto& s : census.wall_shares) c.wall_classes.push_back(s.name);
  const std::size_t nw = c.wall_classes.size(), nm = c.macro_classes.size(), nh = c.height_classes.size();

  c.wall = apportion(total_dwellings, fractions(census.wall_shares));
  c.wall_macro.assign(nw * nm, 0);
  c.cells.assign(nw * nm * nh, 0);
  for (std::size_t w = 0; w < nw; ++w) {
    if (c.wall[w] == 0) continue;
    auto mrows = tables.wall_macro.rows_for(c.wall_classes[w], settlement);
    if (mrows.empty())
      throw SchemaError("sector " + census.sector_id + ": no wall->macro row for wall class '" + c.wall_classes[w] +
                        "' (" + std::string(to_string(settlement)) + ")");
    auto macro_d = apportion(c.wall[w], probabilities(mrows));
    for (std::size_t r = 0; r < mrows.size(); ++r) {
      const std::size_t m = index_of(c.macro_classes, mrows[r]->target);
      c.wall_macro[w * nm + m] += macro_d[r];
      auto hrows = tables.macro_height.rows_for(mrows[r]->target, settlement);
      if (hrows.empty())
        throw SchemaError("sector " + census.sector_id + ": no macro->height row for macro class '" +
                          mrows[r]->target + "'");
      auto height_d = apportion(macro_d[r], probabilities(hrows));
      for (std::size_t q = 0; q < hrows.size(); ++q)
        c.cells[(w * nm + m) * nh + index_of(c.height_classes, hrows[q]->target)] += height_d[q];
    }
  }
  return c;
}

namespace {

ConstraintSet derive_one(const CensusRecord& census, const ConditionalTables& tables, Settlement settlement,
                         double dwellings_real) {
  ConstraintSet cs;
  cs.sector_id = census.sector_id;
  cs.settlement = settlement;
  cs.total_dwellings = round_half_up(dwellings_real);

  const DwellingChain chain = chain_dwellings(census, tables, settlement, cs.total_dwellings);
  const auto& wall_names = chain.wall_classes;
  const auto& macro_names = chain.macro_classes;
  const auto& height_names = chain.height_classes;
  const std::size_t nw = wall_names.size(), nm = macro_names.size(), nh = height_names.size();
  auto at = [&](std::size_t w, std::size_t m, std::size_t h) { return chain.at(w, m, h); };

  std::vector<long long> height_dwellings(nh, 0), height_buildings(nh, 0);
  for (std::size_t w = 0; w < nw; ++w)
    for (std::size_t m = 0; m < nm; ++m)
      for (std::size_t h = 0; h < nh; ++h) height_dwellings[h] += at(w, m, h);

  for (std::size_t h = 0; h < nh; ++h) {
    if (height_dwellings[h] == 0) continue;
    auto trows = tables.height_dwellings.rows_for(height_names[h], settlement);
    if (trows.empty())
      throw SchemaError("sector " + census.sector_id + ": no height->dwellings row for height class '" +
                        height_names[h] + "'");
    auto type_d = apportion(height_dwellings[h], probabilities(trows));
    std::vector<double> quotas(trows.size());
    double sum = 0.0;
    for (std::size_t t = 0; t < trows.size(); ++t) {
      quotas[t] = static_cast<double>(type_d[t]) / trows[t]->dwellings_per_building;
      sum += quotas[t];
    }
    height_buildings[h] = static_cast<long long>(std::ceil(sum - 1e-9));
    round_quotas(quotas, height_buildings[h]);  // per building-type split; validates the bracket
  }
  cs.total_buildings = std::accumulate(height_buildings.begin(), height_buildings.end(), 0LL);

  std::vector<double> wall_q(nw, 0.0), macro_q(nm, 0.0);
  for (std::size_t w = 0; w < nw; ++w)
    for (std::size_t m = 0; m < nm; ++m)
      for (std::size_t h = 0; h < nh; ++h) {
        if (height_dwellings[h] == 0) continue;
        double q = static_cast<double>(at(w, m, h)) * static_cast<double>(height_buildings[h]) /
                   static_cast<double>(height_dwellings[h]);
        wall_q[w] += q;
        macro_q[m] += q;
      }

  auto& b = cs.building_counts;
  b[static_cast<int>(Indicator::wall)] = zip_counts(wall_names, round_quotas(wall_q, cs.total_buildings));
  b[static_cast<int>(Indicator::macro)] = zip_counts(macro_names, round_quotas(macro_q, cs.total_buildings));
  b[static_cast<int>(Indicator::height)] = zip_counts(height_names, height_buildings);
  std::vector<std::string> roof_names;
  for (const auto& s : census.roof_shares) roof_names.push_back(s.name);
  b[static_cast<int>(Indicator::roof)] =
      zip_counts(roof_names, apportion(cs.total_buildings, fractions(census.roof_shares)));

  auto& p = cs.pixel_counts;
  const int wi = static_cast<int>(Indicator::wall);
  auto wall_px = reconcile_pixels(b[wi], std::nullopt);
  p[wi] = zip_counts(wall_names, wall_px);
  const long long wall_total = std::accumulate(wall_px.begin(), wall_px.end(), 0LL);
  for (Indicator ind : {Indicator::roof, Indicator::height, Indicator::macro}) {
    const int i = static_cast<int>(ind);
    std::vector<std::string> names;
    for (const auto& [name, n] : b[i]) names.push_back(name);
    p[i] = zip_counts(names, reconcile_pixels(b[i], wall_total));
  }
  return cs;
}

}  // namespace

SectorConstraints derive_constraints(const CensusRecord& census, const ConditionalTables& tables) {
  census.validate();
  const double hh = compute_household_size(census.population(), census.private_households, census.sector_id);
  if (hh <= 0.0) {
    // Empty sector: zero population gives zero dwellings everywhere.
    Dwellings none;
    return {derive_one(census, tables, Settlement::urban, none.urban),
            derive_one(census, tables, Settlement::rural, none.rural)};
  }
  const auto d = compute_dwellings(census.urban_population, census.rural_population, hh);
  return {derive_one(census, tables, Settlement::urban, d.urban),
          derive_one(census, tables, Settlement::rural, d.rural)};
}

std::string write_constraints(const std::vector<ConstraintSet>& sets) {
  csv::Writer w({"sector_id", "settlement_type", "total_dwellings", "indicator", "class", "buildings", "pixels"});
  for (const auto& cs : sets) {
    for (Indicator ind : kAllIndicators) {
      const auto& bc = cs.buildings(ind);
      const auto& pc = cs.pixels(ind);
      for (std::size_t c = 0; c < bc.size(); ++c) {
        w.row({cs.sector_id, std::string(to_string(cs.settlement)), std::to_string(cs.total_dwellings),
               std::string(to_string(ind)), bc[c].first, std::to_string(bc[c].second), std::to_string(pc[c].second)});
      }
    }
  }
  return w.str();
}

std::vector<ConstraintSet> parse_constraints(std::string_view text, const std::string& origin) {
  auto t = csv::Table::parse(text, origin);
  std::vector<ConstraintSet> out;
  std::map<std::pair<std::string, Settlement>, std::size_t> where;
  for (std::size_t r = 0; r < t.size(); ++r) {
    auto key = std::make_pair(t.at(r, "sector_id"), parse_settlement(t.at(r, "settlement_type")));
    auto it = where.find(key);
    if (it == where.end()) {
      ConstraintSet cs;
      cs.sector_id = key.first;
      cs.settlement = key.second;
      cs.total_dwellings = t.integer(r, "total_dwellings");
      it = where.emplace(key, out.size()).first;
      out.push_back(std::move(cs));
    }
    auto& cs = out[it->second];
    const int i = static_cast<int>(parse_indicator(t.at(r, "indicator")));
    long long b = t.integer(r, "buildings"), p = t.integer(r, "pixels");
    if (b < 0 || p < 0) throw ValidationError(origin + ": negative count at row " + std::to_string(r + 2));
    cs.building_counts[i].emplace_back(t.at(r, "class"), b);
    cs.pixel_counts[i].emplace_back(t.at(r, "class"), p);
  }
  for (auto& cs : out) cs.total_buildings = cs.building_total(Indicator::wall);
  return out;
}

std::vector<ConstraintSet> read_constraints(const std::filesystem::path& path) {
  return parse_constraints(csv::read_file(path), path.string());
}

ClassCounts sector_pixel_targets(const std::vector<ConstraintSet>& sets, std::string_view sector_id,
                                 Indicator indicator) {
  ClassCounts out;
  bool found = false;
  for (const auto& cs : sets) {
    if (cs.sector_id != sector_id) continue;
    for (const auto& [name, n] : cs.pixels(indicator)) {
      auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == name; });
      if (it == out.end()) out.emplace_back(name, n);
      else it->second += n;
    }
    found = true;
  }
  if (!found) throw ValidationError("no constraints for sector '" + std::string(sector_id) + "'");
  return out;
}

std::vector<std::string> constraint_sectors(const std::vector<ConstraintSet>& sets) {
  std::vector<std::string> out;
  for (const auto& cs : sets)
    if (std::find(out.begin(), out.end(), cs.sector_id) == out.end()) out.push_back(cs.sector_id);
  return out;
}

}  // namespace ccc
