#include "doctest.h"

#include <map>

#include "ccc/error.hpp"
#include "ccc/synth.hpp"

using namespace ccc;

TEST_CASE("generation is deterministic per seed") {
  SynthConfig c;
  c.seed = 4;
  c.sectors = 2;
  c.pixels_per_sector = 120;
  const auto a = generate(c), b = generate(c);
  CHECK(write_census(a.census) == write_census(b.census));
  CHECK(write_truth(a.truth) == write_truth(b.truth));
  CHECK(write_groundtruth(a.groundtruth) == write_groundtruth(b.groundtruth));
  c.seed = 5;
  CHECK(write_truth(generate(c).truth) != write_truth(a.truth));
}

TEST_CASE("census is consistent with the planted classes") {
  SynthConfig c;
  c.seed = 1;
  c.sectors = 3;
  c.pixels_per_sector = 300;
  const auto sc = generate(c);
  CHECK(sc.sector_ids().size() == 3);
  std::vector<ConstraintSet> sets;
  for (const auto& rec : sc.census) {
    const auto d = derive_constraints(rec, sc.tables);
    sets.push_back(d.urban);
    sets.push_back(d.rural);
  }
  for (const auto& id : sc.sector_ids()) {
    std::array<std::map<std::string, long long>, 3> planted;
    long long n = 0;
    for (const auto& t : sc.truth)
      if (t.sector_id == id) {
        ++n;
        for (std::size_t i = 0; i < 3; ++i) ++planted[i][t.classes[i]];
      }
    CHECK(n > 0);
    for (std::size_t i = 0; i < 3; ++i)
      for (const auto& [name, count] : sector_pixel_targets(sets, id, kLatentIndicators[i]))
        CHECK(planted[i][name] == count);
  }
}

TEST_CASE("invalid configs") {
  SynthConfig c;
  c.sectors = 0;
  CHECK_THROWS_AS(generate(c), ValidationError);
  c = SynthConfig{};
  c.coverage = 1.5;
  CHECK_THROWS_AS(generate(c), ValidationError);
}

TEST_CASE("scenario training config") {
  const auto t = scenario_train_config(9);
  CHECK(t.seed == 9);
  CHECK(t.restarts > 1);
  CHECK_NOTHROW(t.validate());
}
