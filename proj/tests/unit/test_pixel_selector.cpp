#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>

#include "ccc/error.hpp"
#include "ccc/pixel_selector.hpp"

using namespace ccc;

namespace {

PixelGrid grid2x2(std::vector<std::uint8_t> fp, std::vector<double> prob) {
  return PixelGrid("S", 2, 2, std::move(fp), std::move(prob));
}

}  // namespace

TEST_CASE("add branch tops up with the most probable non-footprint cells") {
  const auto g = grid2x2({1, 1, 0, 0}, {0.9, 0.8, 0.7, 0.4});
  const auto s = select_pixels(g, 3);
  CHECK(s.pixels == std::vector<Pixel>{{0, 0}, {0, 1}, {1, 0}});
  CHECK(s.threshold_used == 0.7);
}

TEST_CASE("remove branch keeps the most probable footprint cells") {
  const auto g = grid2x2({1, 1, 1, 1}, {0.9, 0.8, 0.7, 0.4});
  const auto s = select_pixels(g, 2);
  CHECK(s.pixels == std::vector<Pixel>{{0, 0}, {0, 1}});
  CHECK(s.threshold_used == 0.8);
}

TEST_CASE("empty selection") {
  const auto g = grid2x2({0, 0, 0, 0}, {0.1, 0.2, 0.3, 0.4});
  CHECK(select_pixels(g, 0).pixels.empty());
}

TEST_CASE("equal counts keep exactly the footprint") {
  const auto g = grid2x2({0, 1, 1, 0}, {0.9, 0.1, 0.2, 0.8});
  CHECK(select_pixels(g, 2).pixels == std::vector<Pixel>{{0, 1}, {1, 0}});
}

TEST_CASE("ties go to the earlier row-major cell") {
  const auto g = grid2x2({0, 0, 0, 0}, {0.5, 0.5, 0.5, 0.5});
  CHECK(select_pixels(g, 2).pixels == std::vector<Pixel>{{0, 0}, {0, 1}});
  const auto h = grid2x2({1, 1, 1, 1}, {0.5, 0.5, 0.5, 0.5});
  CHECK(select_pixels(h, 1).pixels == std::vector<Pixel>{{0, 0}});
}

TEST_CASE("no-data cells are never selected and infeasible requests report the deficit") {
  const auto g = grid2x2({1, 0, 0, 0}, {0.9, PixelGrid::kNoData, 0.3, PixelGrid::kNoData});
  CHECK(g.valid_count() == 2);
  CHECK(select_pixels(g, 2).pixels == std::vector<Pixel>{{0, 0}, {1, 0}});
  try {
    select_pixels(g, 5);
    FAIL("expected InfeasibleError");
  } catch (const InfeasibleError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(PixelGrid("S", 2, 2, {1, 0, 0}, {0.1, 0.2, 0.3, 0.4}), ValidationError);
  CHECK_THROWS_AS(PixelGrid("S", 2, 2, {1, 0, 0, 0}, {0.1, 1.2, 0.3, 0.4}), ValidationError);
}

TEST_CASE("randomized grids: exact size and branch invariants") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = 1 + static_cast<int>(rng() % 15), cols = 1 + static_cast<int>(rng() % 15);
    std::vector<std::uint8_t> fp(static_cast<std::size_t>(rows * cols));
    std::vector<double> prob(fp.size());
    for (std::size_t i = 0; i < fp.size(); ++i) {
      fp[i] = u(rng) < 0.4;
      // Coarse probabilities so ties occur.
      prob[i] = u(rng) < 0.1 ? PixelGrid::kNoData : std::round(u(rng) * 10.0) / 10.0;
    }
    const PixelGrid g("S", rows, cols, fp, prob);
    const auto n = static_cast<long long>(rng() % (g.valid_count() + 1));
    const auto s = select_pixels(g, n);
    REQUIRE(static_cast<long long>(s.pixels.size()) == n);
    CHECK(std::is_sorted(s.pixels.begin(), s.pixels.end()));
    CHECK(std::set<Pixel>(s.pixels.begin(), s.pixels.end()).size() == s.pixels.size());

    std::set<std::size_t> chosen;
    for (const auto& p : s.pixels) {
      const auto cell = g.index(p.row, p.col);
      CHECK(g.valid(cell));
      chosen.insert(cell);
    }
    const auto fp_count = static_cast<long long>(g.footprint_count());
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      if (!g.valid(c)) continue;
      if (n >= fp_count && g.footprint(c)) CHECK(chosen.count(c) == 1);
      if (n < fp_count) {
        CHECK((chosen.count(c) == 0 || g.footprint(c)));
        // Selected footprint cells dominate discarded ones.
        if (g.footprint(c) && chosen.count(c) == 0)
          for (auto k : chosen) CHECK(g.probability(k) >= g.probability(c));
      }
    }
    // Same input, same output.
    CHECK(select_pixels(g, n).pixels == s.pixels);
  }
}

TEST_CASE("pixel table and pixel set files round trip") {
  const std::string table =
      "sector_id,row,col,footprint,built_prob\n"
      "A,0,0,1,0.9\n"
      "A,0,1,0,0.2\n"
      "A,1,1,0,0.6\n"
      "B,0,0,0,0.5\n";
  const auto grids = parse_pixel_table(table);
  REQUIRE(grids.size() == 2);
  const auto& a = grids.at("A");
  CHECK(a.valid_count() == 3);
  CHECK_FALSE(a.valid(a.index(1, 0)));
  const auto sel = select_pixels(a, 2);
  CHECK(sel.pixels == std::vector<Pixel>{{0, 0}, {1, 1}});

  const auto text = write_pixel_sets({sel});
  const auto back = parse_pixel_sets(text);
  REQUIRE(back.size() == 1);
  CHECK(back[0].pixels == sel.pixels);
  CHECK(back[0].threshold_used == sel.threshold_used);
}
