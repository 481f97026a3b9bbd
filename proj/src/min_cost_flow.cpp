#include "ccc/min_cost_flow.hpp"

#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>

#include "ccc/error.hpp"

namespace ccc::flow {

namespace {
constexpr Cost kInf = std::numeric_limits<Cost>::max() / 4;
}

MinCostFlowGraph::MinCostFlowGraph(int nodes) : adjacency_(static_cast<std::size_t>(nodes)) {}

int MinCostFlowGraph::add_edge(int from, int to, std::int64_t capacity, Cost cost) {
  const int id = static_cast<int>(edges_.size());
  edges_.push_back({from, to, capacity, 0, cost});
  edges_.push_back({to, from, 0, 0, -cost});
  adjacency_[static_cast<std::size_t>(from)].push_back(id);
  adjacency_[static_cast<std::size_t>(to)].push_back(id + 1);
  return id;
}

MinCostFlowGraph::Result MinCostFlowGraph::solve(int source, int sink, std::int64_t limit) {
  const std::size_t n = adjacency_.size();
  std::vector<Cost> potential(n, 0), dist(n);
  std::vector<int> via(n);

  // Bellman-Ford potentials; costs may be negative on the initial graph.
  std::fill(potential.begin(), potential.end(), kInf);
  potential[static_cast<std::size_t>(source)] = 0;
  for (std::size_t round = 0; round < n; ++round) {
    bool changed = false;
    for (const auto& e : edges_) {
      if (e.capacity - e.flow <= 0 || potential[static_cast<std::size_t>(e.from)] == kInf) continue;
      Cost nd = potential[static_cast<std::size_t>(e.from)] + e.cost;
      if (nd < potential[static_cast<std::size_t>(e.to)]) {
        potential[static_cast<std::size_t>(e.to)] = nd;
        changed = true;
      }
    }
    if (!changed) break;
  }
  for (auto& p : potential)
    if (p == kInf) p = 0;

  Result result;
  while (result.flow < limit) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(via.begin(), via.end(), -1);
    using Item = std::pair<Cost, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[static_cast<std::size_t>(source)] = 0;
    heap.emplace(0, source);
    while (!heap.empty()) {
      auto [d, u] = heap.top();
      heap.pop();
      if (d != dist[static_cast<std::size_t>(u)]) continue;
      for (int id : adjacency_[static_cast<std::size_t>(u)]) {
        const auto& e = edges_[static_cast<std::size_t>(id)];
        if (e.capacity - e.flow <= 0) continue;
        Cost nd = d + e.cost + potential[static_cast<std::size_t>(u)] - potential[static_cast<std::size_t>(e.to)];
        if (nd < dist[static_cast<std::size_t>(e.to)]) {
          dist[static_cast<std::size_t>(e.to)] = nd;
          via[static_cast<std::size_t>(e.to)] = id;
          heap.emplace(nd, e.to);
        }
      }
    }
    if (dist[static_cast<std::size_t>(sink)] == kInf) break;
    for (std::size_t v = 0; v < n; ++v)
      if (dist[v] != kInf) potential[v] += dist[v];

    std::int64_t push = limit - result.flow;
    for (int v = sink; v != source;) {
      const auto& e = edges_[static_cast<std::size_t>(via[static_cast<std::size_t>(v)])];
      push = std::min(push, e.capacity - e.flow);
      v = e.from;
    }
    for (int v = sink; v != source;) {
      const int id = via[static_cast<std::size_t>(v)];
      edges_[static_cast<std::size_t>(id)].flow += push;
      edges_[static_cast<std::size_t>(id ^ 1)].flow -= push;
      result.cost += push * edges_[static_cast<std::size_t>(id)].cost;
      v = edges_[static_cast<std::size_t>(id)].from;
    }
    result.flow += push;
  }
  return result;
}

std::vector<int> solve_transportation(const std::vector<Cost>& costs, std::size_t sources,
                                      const std::vector<std::int64_t>& capacities) {
  const std::size_t k = capacities.size();
  if (costs.size() != sources * k) throw std::invalid_argument("solve_transportation: cost matrix shape");
  const std::int64_t total_cap = std::accumulate(capacities.begin(), capacities.end(), std::int64_t{0});
  if (total_cap < static_cast<std::int64_t>(sources))
    throw InfeasibleError("transportation: capacities hold " + std::to_string(total_cap) + " of " +
                          std::to_string(sources) + " sources");
  auto cost = [&](std::size_t j, std::size_t h) { return costs[j * k + h]; };

  std::vector<int> label(sources, -1);
  std::vector<std::int64_t> load(k, 0);

  // heaps[h * k + g]: sources on h keyed by the cost change of moving to g.
  using Entry = std::pair<Cost, std::size_t>;
  using Heap = std::priority_queue<Entry, std::vector<Entry>, std::greater<>>;
  std::vector<Heap> heaps(k * k);
  auto place = [&](std::size_t j, std::size_t h) {
    label[j] = static_cast<int>(h);
    for (std::size_t g = 0; g < k; ++g)
      if (g != h) heaps[h * k + g].emplace(cost(j, g) - cost(j, h), j);
  };
  // Cheapest live move h -> g, or nullptr when h holds no source.
  auto best_move = [&](std::size_t h, std::size_t g) -> const Entry* {
    auto& heap = heaps[h * k + g];
    while (!heap.empty() && label[heap.top().second] != static_cast<int>(h)) heap.pop();
    return heap.empty() ? nullptr : &heap.top();
  };

  std::vector<Cost> dist(k);
  std::vector<int> prev(k);
  for (std::size_t j = 0; j < sources; ++j) {
    for (std::size_t h = 0; h < k; ++h) {
      dist[h] = capacities[h] > 0 ? cost(j, h) : kInf;
      prev[h] = -1;
    }
    // Bellman-Ford on the k sink nodes; the residual graph has no negative
    // cycles because the current partial assignment is optimal.
    for (std::size_t round = 0; round < k; ++round) {
      bool changed = false;
      for (std::size_t h = 0; h < k; ++h) {
        if (dist[h] == kInf || load[h] == 0) continue;
        for (std::size_t g = 0; g < k; ++g) {
          if (g == h || capacities[g] == 0) continue;
          const Entry* m = best_move(h, g);
          if (!m) continue;
          const Cost nd = dist[h] + m->first;
          if (nd < dist[g]) {
            dist[g] = nd;
            prev[g] = static_cast<int>(h);
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    std::size_t end = k;
    for (std::size_t h = 0; h < k; ++h)
      if (load[h] < capacities[h] && dist[h] != kInf && (end == k || dist[h] < dist[end])) end = h;
    if (end == k) throw InfeasibleError("transportation: no augmenting path");

    // Walk back from the free sink, shifting one source along each arc.
    std::vector<std::pair<std::size_t, std::size_t>> moves;  // (source, destination)
    std::size_t first = end;
    while (prev[first] != -1) {
      const auto h = static_cast<std::size_t>(prev[first]);
      moves.emplace_back(best_move(h, first)->second, first);
      first = h;
      if (moves.size() > k) throw std::logic_error("solve_transportation: cycle in shortest-path tree");
    }
    for (const auto& [i, g] : moves) place(i, g);
    place(j, first);
    ++load[end];
  }
  return label;
}

}  // namespace ccc::flow
