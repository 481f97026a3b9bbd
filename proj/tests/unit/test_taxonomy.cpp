#include "doctest.h"

#include <map>

#include "ccc/error.hpp"
#include "ccc/taxonomy.hpp"

using namespace ccc;

namespace {

const std::vector<std::string> kWalls{"Wood with mud", "Sun-dried bricks", "Cement blocks"};

std::map<std::string, int> tally(const std::vector<std::string>& labels) {
  std::map<std::string, int> m;
  for (const auto& l : labels) ++m[l];
  return m;
}

}  // namespace

TEST_CASE("urban wood with mud is always W+WWD/LWAL") {
  const auto t = default_tables();
  const std::vector<int> labels(6, 0);
  const std::vector<double> z{0.3, 0.1, 0.2, 0.5, 0.4, 0.0};
  const auto a = assign_macro("S", labels, kWalls, z, Settlement::urban, t.wall_macro);
  CHECK(a.labels == std::vector<std::string>(6, "W+WWD/LWAL"));
}

TEST_CASE("ten urban sun-dried brick pixels split 3/2/3/2 in table order by latent") {
  const auto t = default_tables();
  const std::vector<int> labels(10, 1);
  std::vector<double> z;
  for (int j = 9; j >= 0; --j) z.push_back(j);  // pixel 9 has the lowest latent
  const auto a = assign_macro("S", labels, kWalls, z, Settlement::urban, t.wall_macro);
  REQUIRE(a.groups.size() == 1);
  CHECK(a.groups[0].quotas == std::vector<long long>{3, 2, 3, 2});
  CHECK(a.groups[0].macro_classes ==
        std::vector<std::string>{"MUR+ADO+MOC/LWAL", "MUR+CL+MOC/LWAL", "MUR+ADO/LWAL", "MUR+CL/LWAL"});
  // Lowest latents take the first row.
  CHECK(a.labels[9] == "MUR+ADO+MOC/LWAL");
  CHECK(a.labels[7] == "MUR+ADO+MOC/LWAL");
  CHECK(a.labels[6] == "MUR+CL+MOC/LWAL");
  CHECK(a.labels[0] == "MUR+CL/LWAL");
}

TEST_CASE("rural cement blocks are all MUR+CB/LWAL") {
  const auto t = default_tables();
  const std::vector<int> labels(4, 2);
  const std::vector<double> z{1, 2, 3, 4};
  const auto a = assign_macro("S", labels, kWalls, z, Settlement::rural, t.wall_macro);
  CHECK(tally(a.labels) == std::map<std::string, int>{{"MUR+CB/LWAL", 4}});
}

TEST_CASE("mixed sector: quotas per group are exact and labels stay within the table") {
  const auto t = default_tables();
  std::vector<int> labels;
  std::vector<double> z;
  std::vector<Settlement> s;
  for (int j = 0; j < 37; ++j) {
    labels.push_back(j % 3);
    z.push_back(static_cast<double>((j * 17) % 37));
    s.push_back(j % 5 == 0 ? Settlement::rural : Settlement::urban);
  }
  const auto a = assign_macro("S", labels, kWalls, z, s, t.wall_macro);
  for (const auto& g : a.groups) {
    std::map<std::string, long long> got;
    for (auto j : g.pixels) ++got[a.labels[j]];
    for (std::size_t r = 0; r < g.macro_classes.size(); ++r)
      CHECK(got[g.macro_classes[r]] == g.quotas[r]);
  }
  for (std::size_t j = 0; j < labels.size(); ++j) {
    bool ok = false;
    for (const auto* row : t.wall_macro.rows_for(kWalls[static_cast<std::size_t>(labels[j])], s[j]))
      ok = ok || row->target == a.labels[j];
    CHECK(ok);
  }
  CHECK(assign_macro("S", labels, kWalls, z, s, t.wall_macro).labels == a.labels);
}

TEST_CASE("missing table rows and bad labels") {
  const auto t = default_tables();
  const std::vector<std::string> walls{"Unobtainium"};
  CHECK_THROWS_AS(assign_macro("S", std::vector<int>{0}, walls, std::vector<double>{0}, Settlement::urban,
                               t.wall_macro),
                  SchemaError);
  CHECK_THROWS_AS(assign_macro("S", std::vector<int>{5}, kWalls, std::vector<double>{0}, Settlement::urban,
                               t.wall_macro),
                  ValidationError);
}

TEST_CASE("settlement split follows the per-class urban and rural counts") {
  const std::vector<int> labels{0, 0, 0, 0, 1, 1};
  const std::vector<double> z{4, 3, 2, 1, 0, 5};
  const ClassCounts urban{{"Wood with mud", 3}, {"Sun-dried bricks", 0}};
  const ClassCounts rural{{"Wood with mud", 1}, {"Sun-dried bricks", 2}};
  const auto s = split_settlement(labels, kWalls, z, urban, rural);
  // Wood with mud: 3 urban (lowest latents), 1 rural (highest).
  CHECK(s[3] == Settlement::urban);
  CHECK(s[2] == Settlement::urban);
  CHECK(s[1] == Settlement::urban);
  CHECK(s[0] == Settlement::rural);
  CHECK(s[4] == Settlement::rural);
  CHECK(s[5] == Settlement::rural);
}
