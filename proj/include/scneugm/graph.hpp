#pragma once

#include <cstdint>
#include <vector>

#include "scneugm/mac_sim.hpp"
#include "scneugm/network.hpp"

namespace scneugm {

// Binary directed adjacency with zero diagonal.
struct Graph {
  int n = 0;
  std::vector<uint8_t> adj;

  static Graph empty(int n) {
    Graph g;
    g.n = n;
    g.adj.assign(size_t(n) * n, 0);
    return g;
  }
  uint8_t at(int i, int j) const { return adj[size_t(i) * n + j]; }
  void set(int i, int j, uint8_t v) {
    if (i != j) adj[size_t(i) * n + j] = v;
  }
  Graph symmetrized() const;
  long edge_count() const;
};

// Degree-priority greedy coloring on the symmetrized graph: vertices in
// descending degree order (ties by ascending index), smallest feasible
// color. Colors are 1-based slot indices.
SlotAssignment greedy_color(const Graph& g);

// Contention-and-hidden graph: an edge wherever either indicator fires.
Graph chg_graph(const PairIndicators& ind);
Graph chg_graph_subset(const PairIndicators& ind, const std::vector<int>& subset);

// Interference graph heuristic: an edge when two STAs share a detectable AP.
Graph ifg_graph(const std::vector<StationState>& states);

// Greedy chromatic count of the CHG; the Z* surrogate in the reward.
int approx_optimal_slots(const PairIndicators& ind);
int approx_optimal_slots_subset(const PairIndicators& ind,
                                const std::vector<int>& subset);

}  // namespace scneugm
