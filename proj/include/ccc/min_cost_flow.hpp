#pragma once

#include <cstdint>
#include <vector>

namespace ccc::flow {

using Cost = std::int64_t;

// General successive-shortest-path min-cost flow on a directed graph with
// integer capacities and costs (Bellman-Ford for the initial potentials,
// Dijkstra on reduced costs afterwards). Negative cycles are not allowed.
class MinCostFlowGraph {
 public:
  struct Edge {
    int from = 0;
    int to = 0;
    std::int64_t capacity = 0;
    std::int64_t flow = 0;
    Cost cost = 0;
  };

  explicit MinCostFlowGraph(int nodes);

  // Returns the edge id; the paired reverse edge is id ^ 1.
  int add_edge(int from, int to, std::int64_t capacity, Cost cost);

  struct Result {
    std::int64_t flow = 0;
    Cost cost = 0;
  };
  // Pushes up to `limit` units from source to sink along successive
  // shortest paths.
  Result solve(int source, int sink, std::int64_t limit);

  const Edge& edge(int id) const { return edges_[static_cast<std::size_t>(id)]; }
  int node_count() const { return static_cast<int>(adjacency_.size()); }

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
};

// Transportation problem with unit-supply sources (pixels) and a few
// capacitated sinks (clusters). costs is row-major sources x sinks.
// Successive shortest augmenting paths, one source at a time in index order;
// each path search runs on the sink graph whose arc h -> h' is the cheapest
// reassignment of a source currently on h. Returns the sink of every source.
// Throws InfeasibleError when the capacities cannot hold every source.
std::vector<int> solve_transportation(const std::vector<Cost>& costs, std::size_t sources,
                                      const std::vector<std::int64_t>& capacities);

}  // namespace ccc::flow
