#include "doctest.h"

#include <algorithm>
#include <random>

#include "ccc/constrained_kmeans.hpp"
#include "ccc/error.hpp"
#include "ccc/min_cost_flow.hpp"

using namespace ccc;

namespace {

// Independent optimum: enumerate every labeling with the given class counts.
double exhaustive_optimum(const std::vector<double>& z, const std::vector<double>& c,
                          const std::vector<long long>& targets) {
  std::vector<int> labels;
  for (std::size_t h = 0; h < targets.size(); ++h)
    for (long long i = 0; i < targets[h]; ++i) labels.push_back(static_cast<int>(h));
  double best = 1e300;
  do {
    double s = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double d = z[j] - c[static_cast<std::size_t>(labels[j])];
      s += 0.5 * d * d;
    }
    best = std::min(best, s);
  } while (std::next_permutation(labels.begin(), labels.end()));
  return best;
}

std::vector<long long> random_targets(std::size_t m, std::size_t k, std::mt19937_64& rng) {
  std::vector<long long> t(k, 0);
  for (std::size_t j = 0; j < m; ++j) ++t[rng() % k];
  return t;
}

std::vector<long long> counts(const std::vector<int>& labels, std::size_t k) {
  std::vector<long long> c(k, 0);
  for (int l : labels) ++c[static_cast<std::size_t>(l)];
  return c;
}

}  // namespace

TEST_CASE("assignment examples") {
  const std::vector<long long> t22{2, 2};
  CHECK(assign_with_constraints(std::vector<double>{0, 0.1, 1, 1.1}, std::vector<double>{0.05, 1.05}, t22) ==
        std::vector<int>{0, 0, 1, 1});
  const std::vector<long long> t31{3, 1};
  CHECK(assign_with_constraints(std::vector<double>{0, 0.1, 0.2, 1.0}, std::vector<double>{0.1, 1.0}, t31) ==
        std::vector<int>{0, 0, 0, 1});
  const std::vector<long long> all0{5, 0, 0};
  CHECK(assign_with_constraints(std::vector<double>{3, -1, 9, 0.5, 2}, std::vector<double>{100, 0, 1}, all0) ==
        std::vector<int>(5, 0));
}

TEST_CASE("assignment errors") {
  const std::vector<double> z{0, 1, 2}, c{0, 1};
  CHECK_THROWS_AS(assign_with_constraints(z, c, std::vector<long long>{4, -1}), ValidationError);
  CHECK_THROWS_AS(assign_with_constraints(z, c, std::vector<long long>{1, 1}), InfeasibleError);
  CHECK_THROWS_AS(assign_with_constraints(z, c, std::vector<long long>{3, 1}), InfeasibleError);
  CHECK_THROWS_AS(assign_with_constraints(std::vector<double>{1e200}, std::vector<double>{-1e200},
                                          std::vector<long long>{1}),
                  NumericalError);
}

TEST_CASE("slack absorbs a short target and marks the leftover pixels") {
  std::vector<std::uint8_t> slack;
  const auto labels = assign_with_constraints(std::vector<double>{0, 0.1, 5, 10}, std::vector<double>{0, 10},
                                              std::vector<long long>{2, 1}, SlackPolicy::absorb, &slack);
  CHECK(counts(labels, 2) == std::vector<long long>{3, 1});
  CHECK(std::count(slack.begin(), slack.end(), 1) == 1);
  CHECK(labels[3] == 1);
}

TEST_CASE("flow solution is optimal against exhaustive enumeration") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng() % 9, k = 1 + rng() % 3;
    std::vector<double> z(m), c(k);
    for (double& v : z) v = n(rng);
    for (double& v : c) v = n(rng);
    const auto t = random_targets(m, k, rng);
    const auto labels = assign_with_constraints(z, c, t);
    CHECK(counts(labels, k) == t);
    const double got = assignment_objective(z, c, labels);
    CHECK(got <= exhaustive_optimum(z, c, t) + 1e-9);
    CHECK(assignment_objective(z, c, brute_force_assign(z, c, t)) == doctest::Approx(got).epsilon(1e-9));
  }
}

TEST_CASE("brute force guards") {
  const std::vector<double> z(13, 0.0), c{0.0};
  CHECK_THROWS_AS(brute_force_assign(z, c, std::vector<long long>{13}), std::invalid_argument);
  CHECK_THROWS_AS(brute_force_assign(std::vector<double>{0, 1}, c, std::vector<long long>{1}), InfeasibleError);
}

TEST_CASE("transportation solver on a small table") {
  // Two sources, two sinks; crossing is cheaper.
  const std::vector<flow::Cost> costs{5, 1, 1, 5};
  CHECK(flow::solve_transportation(costs, 2, {1, 1}) == std::vector<int>{1, 0});
  CHECK_THROWS_AS(flow::solve_transportation(costs, 2, {1, 0}), InfeasibleError);

  flow::MinCostFlowGraph g(4);
  g.add_edge(0, 1, 2, 1);
  g.add_edge(0, 2, 2, 3);
  g.add_edge(1, 3, 1, 0);
  g.add_edge(2, 3, 5, 0);
  const auto r = g.solve(0, 3, 3);
  CHECK(r.flow == 3);
  CHECK(r.cost == 1 + 3 + 3);
}

TEST_CASE("large instances keep column sums exact") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  const std::size_t m = 3000, k = 6;
  std::vector<double> z(m);
  for (double& v : z) v = n(rng);
  const auto t = random_targets(m, k, rng);
  const std::vector<double> c{-2, -1, 0, 0.5, 1, 3};
  CHECK(counts(assign_with_constraints(z, c, t), k) == t);
}

TEST_CASE("center updates and initialization") {
  const std::vector<double> z{1, 3, 10, 20};
  CHECK(update_centers(z, std::vector<int>{0, 0, 1, 1}, std::vector<double>{0, 0, 7}) ==
        std::vector<double>{2, 15, 7});
  const std::vector<std::uint8_t> slack{0, 1, 0, 0};
  CHECK(update_centers(z, std::vector<int>{0, 0, 1, 1}, std::vector<double>{0, 0}, slack) ==
        std::vector<double>{1, 15});
  // Centers sit at the middle of each class's quantile block.
  const std::vector<double> q{5, 4, 3, 2, 1, 0};
  CHECK(initial_centers(q, std::vector<long long>{2, 4}) == std::vector<double>{1, 4});
}

TEST_CASE("fit: objective never increases and blobs are recovered") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 0.1);
  std::vector<double> z;
  std::vector<int> truth;
  for (int h = 0; h < 3; ++h)
    for (int i = 0; i < 40 + 20 * h; ++i) {
      z.push_back(3.0 * h + n(rng));
      truth.push_back(h);
    }
  std::vector<std::size_t> order(z.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<double> zs;
  std::vector<int> ts;
  for (auto i : order) {
    zs.push_back(z[i]);
    ts.push_back(truth[i]);
  }
  ClusterSpec spec;
  spec.class_names = {"a", "b", "c"};
  spec.targets = {40, 60, 80};
  const auto st = fit(zs, spec);
  for (std::size_t i = 1; i < st.objective_history.size(); ++i)
    CHECK(st.objective_history[i] <= st.objective_history[i - 1] + 1e-12);
  CHECK(st.column_sums() == spec.targets);
  CHECK(st.labels == ts);
  // Poor starting centers still end with the exact class sizes and a monotone objective.
  const auto poor = fit(zs, spec, std::vector<double>{5.0, 0.0, 2.0});
  CHECK(poor.column_sums() == spec.targets);
  for (std::size_t i = 1; i < poor.objective_history.size(); ++i)
    CHECK(poor.objective_history[i] <= poor.objective_history[i - 1] + 1e-12);
}

TEST_CASE("fit with one class takes every pixel and the mean") {
  ClusterSpec spec;
  spec.targets = {4};
  const auto st = fit(std::vector<double>{1, 2, 3, 6}, spec);
  CHECK(st.labels == std::vector<int>(4, 0));
  CHECK(st.centers[0] == 3.0);
  CHECK(st.selection_array().rows() == 4);
}

TEST_CASE("constrained assignment equals nearest center when targets match it") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<double> c{-3, 0.2, 4};
    std::vector<double> z(60);
    std::vector<int> nearest(60);
    for (std::size_t j = 0; j < z.size(); ++j) {
      z[j] = u(rng);
      int b = 0;
      for (int h = 1; h < 3; ++h)
        if (std::abs(z[j] - c[static_cast<std::size_t>(h)]) < std::abs(z[j] - c[static_cast<std::size_t>(b)])) b = h;
      nearest[j] = b;
    }
    CHECK(assign_with_constraints(z, c, counts(nearest, 3)) == nearest);
  }
}

TEST_CASE("clustering loss examples and validation") {
  AssignmentState st;
  st.latents = {0.5};
  st.centers = {0.0};
  st.labels = {0};
  const std::vector<double> w1{1.0};
  const auto l = clustering_loss(st, GroundtruthOverlay::uncovered(1), w1);
  CHECK(l.value == 0.5);
  CHECK(l.latent_gradient == std::vector<double>{1.0});

  CHECK_THROWS_AS(clustering_loss(st, GroundtruthOverlay::uncovered(1), std::vector<double>{0.5}), ValidationError);
  CHECK_THROWS_AS(clustering_loss(st, GroundtruthOverlay::uncovered(1), std::vector<double>{0.5, 0.5}),
                  ValidationError);
  CHECK_THROWS_AS(clustering_loss(st, GroundtruthOverlay::uncovered(1), std::vector<double>{-1.0}), ValidationError);
}

TEST_CASE("covered pixels are pulled to the nearest allowed center") {
  AssignmentState st;
  st.latents = {0.0, 0.9};
  st.centers = {0.0, 1.0, 3.0};
  st.labels = {0, 1};
  GroundtruthOverlay ov{{{1, 2}, {}}};
  const std::vector<double> w{0.2, 0.5, 0.3};
  const auto l = clustering_loss(st, ov, w);
  CHECK(l.targets == std::vector<int>{1, 1});
  CHECK(l.value == doctest::Approx(0.5 * 1.0 + 0.5 * 0.1));
  CHECK(l.latent_gradient[0] == -0.5);
  CHECK(l.latent_gradient[1] == -0.5);
}

TEST_CASE("label weights are normalized inverse coverage") {
  GroundtruthOverlay ov{{{0}, {0}, {0}, {1}, {}, {0, 1}}};
  CHECK(ov.covered_count() == 5);
  const auto w = label_weights(ov, 3);
  // counts 4 and 2, class 2 absent
  CHECK(w[0] == doctest::Approx((1.0 / 4) / (1.0 / 4 + 1.0 / 2)));
  CHECK(w[1] == doctest::Approx((1.0 / 2) / (1.0 / 4 + 1.0 / 2)));
  CHECK(w[2] == 0.0);
  const auto u = label_weights(GroundtruthOverlay::uncovered(3), 4);
  CHECK(u == std::vector<double>(4, 0.25));
}
