#include "doctest.h"

#include <numeric>
#include <random>

#include "ccc/census.hpp"
#include "ccc/error.hpp"

using namespace ccc;

namespace {

CensusRecord make_census(long long urban, long long rural, long long households,
                         std::vector<std::pair<std::string, double>> wall = {{"Wood with mud", 1.0}},
                         std::vector<std::pair<std::string, double>> roof = {{"Iron Sheets", 1.0}}) {
  CensusRecord c;
  c.sector_id = "S";
  c.urban_population = urban;
  c.rural_population = rural;
  c.private_households = households;
  for (auto& [n, f] : wall) c.wall_shares.push_back({n, f});
  for (auto& [n, f] : roof) c.roof_shares.push_back({n, f});
  return c;
}

long long count_of(const ClassCounts& counts, const std::string& name) {
  for (const auto& [n, v] : counts)
    if (n == name) return v;
  return -1;
}

long long sum_of(const ClassCounts& counts) {
  long long s = 0;
  for (const auto& [n, v] : counts) s += v;
  return s;
}

// Independent largest-remainder oracle: floors first, then one extra unit to
// the largest fractional parts, lower index first on ties.
std::vector<long long> hamilton(long long total, const std::vector<double>& shares) {
  std::vector<long long> out(shares.size());
  std::vector<std::pair<double, std::size_t>> rem;
  long long used = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const double q = static_cast<double>(total) * shares[i];
    out[i] = static_cast<long long>(std::floor(q));
    used += out[i];
    rem.emplace_back(q - std::floor(q), i);
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
  for (long long k = 0; k < total - used; ++k) ++out[rem[static_cast<std::size_t>(k)].second];
  return out;
}

}  // namespace

TEST_CASE("household size is population over households") {
  CHECK(compute_household_size(5460, 1000) == doctest::Approx(5.46));
  CHECK(compute_household_size(1000, 1000) == 1.0);
  CHECK(compute_household_size(11531, 2500) == doctest::Approx(4.6124));
  CHECK_THROWS_AS(compute_household_size(10, 0, "Gitovu"), DegenerateInputError);
  try {
    compute_household_size(10, 0, "Gitovu");
  } catch (const DegenerateInputError& e) {
    CHECK(std::string(e.what()).find("Gitovu") != std::string::npos);
  }
}

TEST_CASE("dwellings divide each population by household size") {
  auto d = compute_dwellings(1000, 0, 5.0);
  CHECK(d.urban == 200.0);
  CHECK(d.rural == 0.0);
  d = compute_dwellings(546, 546, 5.46);
  CHECK(d.urban == doctest::Approx(100.0));
  CHECK(d.rural == doctest::Approx(100.0));
  d = compute_dwellings(0, 0, 4.0);
  CHECK(d.urban == 0.0);
  CHECK(d.rural == 0.0);
  CHECK_THROWS_AS(compute_dwellings(1, 1, 0.0), DegenerateInputError);
  CHECK_THROWS_AS(compute_dwellings(1, 1, -2.0), DegenerateInputError);
}

TEST_CASE("apportion examples") {
  CHECK(apportion(100, {0.3, 0.2, 0.3, 0.2}) == std::vector<long long>{30, 20, 30, 20});
  CHECK(apportion(10, {0.475, 0.475, 0.05}) == std::vector<long long>{5, 5, 0});
  CHECK(apportion(0, {0.5, 0.5}) == std::vector<long long>{0, 0});
  // Equal remainders: the lower index wins.
  CHECK(apportion(1, {0.5, 0.5}) == std::vector<long long>{1, 0});
  CHECK(apportion(2, {1.0 / 3, 1.0 / 3, 1.0 / 3}) == std::vector<long long>{1, 1, 0});
}

TEST_CASE("apportion rejects bad shares") {
  CHECK_THROWS_AS(apportion(10, {0.5, 0.4}), ValidationError);
  CHECK_THROWS_AS(apportion(10, {1.2, -0.2}), ValidationError);
  CHECK_THROWS_AS(apportion(-1, {1.0}), ValidationError);
}

TEST_CASE("apportion matches an independent largest-remainder count") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long long> total(0, 5000);
  std::uniform_int_distribution<int> k(1, 9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> shares(static_cast<std::size_t>(k(rng)));
    for (double& s : shares) s = u(rng);
    const double sum = std::accumulate(shares.begin(), shares.end(), 0.0);
    for (double& s : shares) s /= sum;
    const long long t = total(rng);
    const auto got = apportion(t, shares);
    CHECK(std::accumulate(got.begin(), got.end(), 0LL) == t);
    CHECK(got == hamilton(t, shares));
    for (std::size_t i = 0; i < shares.size(); ++i) CHECK(std::abs(got[i] - t * shares[i]) < 1.0);
  }
}

TEST_CASE("apportion can lose a unit when the total grows, never more") {
  // Largest remainder is not house-monotone: growing the total can take a
  // unit away from a class. The loss is bounded by one.
  const std::vector<double> shares{0.1, 0.25, 0.05, 0.6};
  auto prev = apportion(0, shares);
  int drops = 0;
  for (long long t = 1; t <= 500; ++t) {
    const auto cur = apportion(t, shares);
    for (std::size_t i = 0; i < shares.size(); ++i) {
      CHECK(cur[i] >= prev[i] - 1);
      if (cur[i] < prev[i]) ++drops;
    }
    prev = cur;
  }
  CHECK(drops > 0);
}

TEST_CASE("building to pixel conversion rounds half up") {
  CHECK(buildings_to_pixels(1000) == 600);
  CHECK(buildings_to_pixels(0) == 0);
  CHECK(buildings_to_pixels(1) == 1);
  CHECK(buildings_to_pixels(4) == 2);   // 2.4
  CHECK(buildings_to_pixels(5) == 3);   // 3.0
  CHECK(pixels_to_buildings(3) == 5);   // 5.0
  CHECK(pixels_to_buildings(2) == 3);   // 3.33
  CHECK(pixels_to_buildings(1) == 2);   // 1.67
}

TEST_CASE("pixels to buildings to pixels is the identity") {
  for (long long p = 0; p <= 1000000; ++p) {
    if (buildings_to_pixels(pixels_to_buildings(p)) != p) {
      FAIL("round trip broken at " << p);
    }
  }
}

TEST_CASE("all wood-with-mud urban walls give one macro class") {
  const auto c = make_census(10000, 0, 2000);
  const auto sc = derive_constraints(c, default_tables());
  CHECK(sc.urban.total_dwellings == 2000);
  const auto& macro = sc.urban.buildings(Indicator::macro);
  CHECK(count_of(macro, "W+WWD/LWAL") == sc.urban.total_buildings);
  CHECK(sum_of(macro) == sc.urban.total_buildings);
  CHECK(sc.rural.total_dwellings == 0);
  CHECK(sc.rural.total_buildings == 0);
}

TEST_CASE("building counts follow dwellings per building") {
  // One macro class that is always H:1 (MATO) and one always HBET:8+.
  std::vector<ConditionalRow> wm = {{"Others", Settlement::any, "MATO", 1.0},
                                    {"Concrete", Settlement::any, "TALL", 1.0}};
  std::vector<ConditionalRow> mh = {{"MATO", Settlement::any, "H:1", 1.0},
                                    {"TALL", Settlement::any, "HBET:8+", 1.0}};
  std::vector<ConditionalRow> hd = {{"H:1", Settlement::any, "Dwelling-house", 1.0, 1},
                                    {"HBET:8+", Settlement::any, "Apartment/Flat", 1.0, 16}};
  ConditionalTables t{ConditionalTable(TableKind::wall_to_macro, wm), ConditionalTable(TableKind::macro_to_height, mh),
                      ConditionalTable(TableKind::height_to_dwellings, hd)};

  SUBCASE("1000 dwellings, all H:1") {
    const auto sc = derive_constraints(make_census(4000, 0, 1000, {{"Others", 1.0}}), t);
    CHECK(sc.urban.total_dwellings == 1000);
    CHECK(sc.urban.total_buildings == 1000);
    CHECK(count_of(sc.urban.buildings(Indicator::height), "H:1") == 1000);
  }
  SUBCASE("100 dwellings, all HBET:8+") {
    const auto sc = derive_constraints(make_census(400, 0, 100, {{"Concrete", 1.0}}), t);
    CHECK(sc.urban.total_dwellings == 100);
    CHECK(sc.urban.total_buildings == 7);
    CHECK(count_of(sc.urban.buildings(Indicator::height), "HBET:8+") == 7);
  }
}

TEST_CASE("constraint sets keep every indicator on the same totals") {
  const auto c = make_census(23456, 8765, 6100,
                             {{"Wood with mud", 0.31}, {"Sun-dried bricks", 0.27}, {"Burnt bricks", 0.12},
                              {"Cement blocks", 0.1}, {"Concrete", 0.05}, {"Stone", 0.05}, {"Timber", 0.06},
                              {"Others", 0.04}},
                             {{"Iron Sheets", 0.7}, {"Tiles", 0.2}, {"Concrete", 0.04}, {"Grass", 0.06}});
  const auto sc = derive_constraints(c, default_tables());
  for (const ConstraintSet* cs : {&sc.urban, &sc.rural}) {
    for (Indicator ind : kAllIndicators) {
      CHECK(cs->building_total(ind) == cs->total_buildings);
      CHECK(cs->pixel_total(ind) == cs->pixel_total(Indicator::wall));
    }
    // Wall pixels come straight from the per-class conversion.
    for (const auto& [name, b] : cs->buildings(Indicator::wall))
      CHECK(count_of(cs->pixels(Indicator::wall), name) == buildings_to_pixels(b));
  }
}

TEST_CASE("dwelling chain conserves counts at every link") {
  const auto c = make_census(5000, 3000, 1900,
                             {{"Wood with mud", 0.2}, {"Sun-dried bricks", 0.3}, {"Burnt bricks", 0.2},
                              {"Cement blocks", 0.3}});
  const auto t = default_tables();
  const auto chain = chain_dwellings(c, t, Settlement::rural, 1234);
  const std::size_t nw = chain.wall_classes.size(), nm = chain.macro_classes.size(),
                    nh = chain.height_classes.size();
  CHECK(std::accumulate(chain.wall.begin(), chain.wall.end(), 0LL) == 1234);
  for (std::size_t w = 0; w < nw; ++w) {
    long long macro_sum = 0;
    for (std::size_t m = 0; m < nm; ++m) {
      macro_sum += chain.wall_macro[w * nm + m];
      long long height_sum = 0;
      for (std::size_t h = 0; h < nh; ++h) height_sum += chain.at(w, m, h);
      CHECK(height_sum == chain.wall_macro[w * nm + m]);
    }
    CHECK(macro_sum == chain.wall[w]);
  }
}

TEST_CASE("missing conditional rows are schema errors") {
  std::vector<ConditionalRow> wm = {{"Wood with mud", Settlement::urban, "W+WWD/LWAL", 1.0}};
  auto t = default_tables();
  t.wall_macro = ConditionalTable(TableKind::wall_to_macro, wm);
  CHECK_NOTHROW(derive_constraints(make_census(100, 0, 20), t));
  CHECK_THROWS_AS(derive_constraints(make_census(100, 100, 40), t), SchemaError);
  CHECK_THROWS_AS(derive_constraints(make_census(100, 0, 20, {{"Stone", 1.0}}), t), SchemaError);
}

TEST_CASE("conditional tables validate their rows") {
  CHECK_THROWS_AS(ConditionalTable(TableKind::wall_to_macro, {{"A", Settlement::urban, "X", 0.6},
                                                              {"A", Settlement::urban, "Y", 0.3}}),
                  ValidationError);
  CHECK_THROWS_AS(ConditionalTable(TableKind::wall_to_macro, {{"A", Settlement::urban, "X", 1.5}}), ValidationError);
  CHECK_THROWS_AS(ConditionalTable(TableKind::height_to_dwellings, {{"H:1", Settlement::any, "D", 1.0, 0}}),
                  ValidationError);
  // Settlement-specific rows take precedence over `any`.
  ConditionalTable t(TableKind::wall_to_macro, {{"A", Settlement::any, "X", 1.0}, {"A", Settlement::rural, "Y", 1.0}});
  CHECK(t.rows_for("A", Settlement::urban).front()->target == "X");
  CHECK(t.rows_for("A", Settlement::rural).front()->target == "Y");
  CHECK(t.rows_for("B", Settlement::rural).empty());
}

TEST_CASE("census validation") {
  auto c = make_census(10, 10, 4, {{"Wood with mud", 0.5}, {"Stone", 0.4}});
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = make_census(10, 10, 0);
  CHECK_THROWS_AS(c.validate(), DegenerateInputError);
  c = make_census(-1, 10, 4);
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("census and tables survive parse, serialize, parse") {
  const std::string text =
      "sector_id,urban_pop,rural_pop,households,wall_Wood with mud,wall_Stone,roof_Iron Sheets,roof_Tiles\n"
      "A,1000,200,300,0.25,0.75,0.5,0.5\n"
      "B,0,5000,1100,1,0,0.125,0.875\n";
  const auto first = parse_census(text);
  REQUIRE(first.size() == 2);
  CHECK(first[0].wall_shares[1].name == "Stone");
  CHECK(first[1].roof_shares[1].fraction == 0.875);
  const auto second = parse_census(write_census(first));
  CHECK(write_census(second) == write_census(first));

  const auto t = default_tables();
  for (const auto* table : {&t.wall_macro, &t.macro_height, &t.height_dwellings}) {
    const auto again = ConditionalTable::parse(table->serialize(), table->kind());
    CHECK(again.serialize() == table->serialize());
    CHECK(again.rows().size() == table->rows().size());
  }
}

TEST_CASE("constraint file round trip") {
  const auto c = make_census(3000, 2000, 1100, {{"Wood with mud", 0.6}, {"Cement blocks", 0.4}},
                             {{"Iron Sheets", 0.9}, {"Tiles", 0.1}});
  const auto sc = derive_constraints(c, default_tables());
  const std::vector<ConstraintSet> sets{sc.urban, sc.rural};
  const auto text = write_constraints(sets);
  const auto back = parse_constraints(text);
  CHECK(write_constraints(back) == text);
  const auto targets = sector_pixel_targets(back, "S", Indicator::wall);
  CHECK(sum_of(targets) == sc.urban.pixel_total(Indicator::wall) + sc.rural.pixel_total(Indicator::wall));
  CHECK_THROWS_AS(sector_pixel_targets(back, "missing", Indicator::wall), ValidationError);
}
