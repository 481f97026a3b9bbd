#include "doctest.h"

#include <filesystem>
#include <random>

#include "ccc/error.hpp"
#include "ccc/metrics.hpp"

using namespace ccc;

TEST_CASE("height ranges") {
  const auto r = HeightRange::parse("[6,9)");
  CHECK(r.contains(6.0));
  CHECK(r.contains(8.999));
  CHECK_FALSE(r.contains(9.0));
  CHECK(r.label() == "[6,9)");
  const auto open = HeightRange::parse("(0,6)");
  CHECK_FALSE(open.contains(0.0));
  CHECK(HeightRange::parse("[24,+inf)").contains(1e9));
  CHECK_THROWS_AS(HeightRange::parse("6,9"), ValidationError);
  CHECK_THROWS_AS(HeightRange::parse("[9,6)"), ValidationError);
}

TEST_CASE("default mapping: high-rise roofs may be concrete") {
  const auto m = default_label_mapping();
  const auto* a = m.allowed(Indicator::roof, "High-rise buildings");
  REQUIRE(a != nullptr);
  CHECK(std::find(a->begin(), a->end(), "Concrete") != a->end());
  CHECK(std::find(a->begin(), a->end(), "Iron Sheets") != a->end());
  CHECK(m.allowed(Indicator::roof, "Spaceship") == nullptr);
  // Every positive height lands in exactly one range.
  for (double h : {0.5, 5.99, 6.0, 11.0, 20.9, 23.0, 24.0, 300.0}) {
    int hits = 0;
    for (const auto& [range, allowed] : m.height_ranges()) hits += range.contains(h);
    CHECK(hits == 1);
  }
}

TEST_CASE("mapping validation rejects gaps") {
  LabelMapping m;
  m.add(Indicator::roof, "X", "Iron Sheets");
  m.add_height(HeightRange::parse("(0,6)"), "H:1");
  m.add_height(HeightRange::parse("[9,+inf)"), "H:2");
  CHECK_THROWS_AS(m.validate(), ValidationError);
}

TEST_CASE("mapping files round trip") {
  const auto m = default_label_mapping();
  const auto dir = std::filesystem::temp_directory_path() / "ccc_test_mapping";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  m.write(dir);
  const auto back = LabelMapping::read(dir);
  CHECK(back.labels(Indicator::roof) == m.labels(Indicator::roof));
  CHECK(back.labels(Indicator::wall) == m.labels(Indicator::wall));
  CHECK(back.height_ranges() == m.height_ranges());
  std::filesystem::remove_all(dir);
}

TEST_CASE("modified precision counts allowed-set membership over covered pixels") {
  GroundtruthOverlay ov{{{0}, {0, 1}, {2}, {1}, {}}};
  CHECK(modified_precision(std::vector<int>{0, 1, 2, 0, 2}, ov) == 0.75);
  CHECK(modified_precision(std::vector<int>{0, 0, 2, 1, 1}, ov) == 1.0);
  CHECK_FALSE(modified_precision(std::vector<int>{0}, GroundtruthOverlay::uncovered(1)).has_value());
}

TEST_CASE("overlay from groundtruth with the default mapping") {
  const auto m = default_label_mapping();
  const std::vector<std::string> roofs{"Iron Sheets", "Local, Industrial, and Asbestos Tiles", "Concrete", "Grass"};
  const std::vector<Pixel> pixels{{0, 0}, {0, 1}, {1, 1}};
  const std::vector<GroundtruthRecord> gt{{"S", {0, 1}, "High-rise buildings", 30.0},
                                          {"T", {0, 0}, "Halls", std::nullopt},
                                          {"S", {1, 1}, "", 4.0}};
  const auto ov = build_overlay(pixels, gt, "S", m, Indicator::roof, roofs);
  CHECK(ov.covered_count() == 1);
  CHECK(ov.allowed[1] == std::vector<int>{0, 2});
  CHECK(modified_precision(std::vector<int>{3, 2, 3}, ov) == 1.0);

  const std::vector<std::string> heights{"H:1", "H:2", "H:3", "HBET:3-6", "HBET:4-7", "HBET:8+"};
  const auto hv = build_overlay(pixels, gt, "S", m, Indicator::height, heights);
  CHECK(hv.allowed[1] == std::vector<int>{5});
  CHECK(hv.allowed[2] == std::vector<int>{0, 1});

  const std::vector<GroundtruthRecord> bad{{"S", {0, 0}, "Spaceship", std::nullopt}};
  CHECK_THROWS_AS(build_overlay(pixels, bad, "S", m, Indicator::roof, roofs), SchemaError);
  CHECK_THROWS_AS(build_overlay(pixels, gt, "S", m, Indicator::roof, std::vector<std::string>{"Iron Sheets"}),
                  SchemaError);
}

TEST_CASE("class weights") {
  CHECK(class_weights(std::vector<long long>{25, 25, 25, 25}, 4, 100) == std::vector<double>{1, 1, 1, 1});
  CHECK(class_weights(std::vector<long long>{50}, 4, 100) == std::vector<double>{0.5});
  CHECK(class_weights(std::vector<long long>{100, 0}, 2, 100) == std::vector<double>{0.5, 0});
}

TEST_CASE("weighted precision") {
  CHECK(weighted_precision(std::vector<double>{0.7, 0.7, 0.7}, std::vector<double>{1, 1, 1}) ==
        doctest::Approx(0.7));
  CHECK(weighted_precision(std::vector<double>{1.0}, std::vector<double>{0.5}) == 0.5);
  CHECK(weighted_precision(std::vector<double>{0, 0}, std::vector<double>{0.3, 2}) == 0.0);
  // Zero-weight classes are excluded.
  CHECK(weighted_precision(std::vector<double>{0.4, 1.0}, std::vector<double>{1, 0}) == doctest::Approx(0.4));
}

TEST_CASE("score report agrees with an independent recount and ignores pixel order") {
  std::mt19937_64 rng(4);
  const std::size_t k = 5, n = 500;
  GroundtruthOverlay ov = GroundtruthOverlay::uncovered(n);
  std::vector<int> pred(n);
  for (std::size_t j = 0; j < n; ++j) {
    pred[j] = static_cast<int>(rng() % k);
    if (rng() % 3)
      for (int h = 0; h < static_cast<int>(k); ++h)
        if (rng() % 2) ov.allowed[j].push_back(h);
  }
  const auto s = score_indicator(Indicator::roof, pred, ov, k);
  std::size_t covered = 0, tp = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (ov.allowed[j].empty()) continue;
    ++covered;
    for (int h : ov.allowed[j]) tp += (h == pred[j]);
  }
  CHECK(s.covered == covered);
  CHECK(s.true_positives == tp);
  CHECK(s.true_positives + s.false_positives == s.covered);
  CHECK(*s.precision == doctest::Approx(static_cast<double>(tp) / static_cast<double>(covered)));

  std::vector<int> rp(pred.rbegin(), pred.rend());
  GroundtruthOverlay ro{{ov.allowed.rbegin(), ov.allowed.rend()}};
  const auto r = score_indicator(Indicator::roof, rp, ro, k);
  CHECK(*r.precision == *s.precision);
  CHECK(*r.weighted == doctest::Approx(*s.weighted));
}

TEST_CASE("uniform random predictions score about a/k") {
  std::mt19937_64 rng(8);
  const int k = 6, a = 2;
  const std::size_t n = 10000;
  GroundtruthOverlay ov = GroundtruthOverlay::uncovered(n);
  std::vector<int> pred(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<int> classes{0, 1, 2, 3, 4, 5};
    std::shuffle(classes.begin(), classes.end(), rng);
    ov.allowed[j].assign(classes.begin(), classes.begin() + a);
    std::sort(ov.allowed[j].begin(), ov.allowed[j].end());
    pred[j] = static_cast<int>(rng() % k);
  }
  CHECK(std::abs(*modified_precision(pred, ov) - static_cast<double>(a) / k) < 0.05);
}

TEST_CASE("groundtruth csv round trip") {
  const std::string text =
      "sector_id,row,col,building_type_label,height_m\n"
      "S,1,2,Halls,7.5\n"
      "S,0,0,,\n";
  const auto g = parse_groundtruth(text);
  REQUIRE(g.size() == 2);
  CHECK(g[0].height_m == 7.5);
  CHECK_FALSE(g[1].height_m.has_value());
  CHECK(g[1].building_type.empty());
  const auto again = parse_groundtruth(write_groundtruth(g));
  CHECK(again[0].building_type == "Halls");
  CHECK(again[0].pixel == g[0].pixel);
}
