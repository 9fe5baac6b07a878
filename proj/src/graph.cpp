#include "scneugm/graph.hpp"

#include <algorithm>
#include <numeric>

namespace scneugm {

Graph Graph::symmetrized() const {
  Graph s = *this;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (at(i, j) || at(j, i)) s.adj[size_t(i) * n + j] = 1;
  return s;
}

long Graph::edge_count() const {
  long c = 0;
  for (uint8_t v : adj) c += v;
  return c;
}

SlotAssignment greedy_color(const Graph& g) {
  const Graph s = g.symmetrized();
  const int n = s.n;
  std::vector<int> degree(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) degree[i] += s.at(i, j);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (degree[a] != degree[b]) return degree[a] > degree[b];
    return a < b;
  });

  SlotAssignment out;
  out.slot_of.assign(n, 0);
  int max_color = 0;
  std::vector<uint8_t> used(size_t(n) + 2, 0);
  for (int v : order) {
    std::fill(used.begin(), used.end(), 0);
    for (int j = 0; j < n; ++j)
      if (s.at(v, j) && out.slot_of[j] > 0) used[out.slot_of[j]] = 1;
    int color = 1;
    while (used[color]) ++color;
    out.slot_of[v] = color;
    max_color = std::max(max_color, color);
  }
  out.num_slots = std::max(max_color, 1);
  return out;
}

Graph chg_graph(const PairIndicators& ind) {
  Graph g = Graph::empty(ind.k);
  for (int i = 0; i < ind.k; ++i)
    for (int j = 0; j < ind.k; ++j)
      if (i != j && ind.either(i, j)) g.set(i, j, 1);
  return g;
}

Graph chg_graph_subset(const PairIndicators& ind,
                       const std::vector<int>& subset) {
  const int n = static_cast<int>(subset.size());
  Graph g = Graph::empty(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b && ind.either(subset[a], subset[b])) g.set(a, b, 1);
  return g;
}

Graph ifg_graph(const std::vector<StationState>& states) {
  const int n = static_cast<int>(states.size());
  Graph g = Graph::empty(n);
  auto shares_ap = [&](int i, int j) {
    for (const auto& a : states[i].entries)
      for (const auto& b : states[j].entries)
        if (a.ap_x == b.ap_x && a.ap_y == b.ap_y) return true;
    return false;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (shares_ap(i, j)) {
        g.set(i, j, 1);
        g.set(j, i, 1);
      }
  return g;
}

int approx_optimal_slots(const PairIndicators& ind) {
  return greedy_color(chg_graph(ind)).num_slots;
}

int approx_optimal_slots_subset(const PairIndicators& ind,
                                const std::vector<int>& subset) {
  return greedy_color(chg_graph_subset(ind, subset)).num_slots;
}

}  // namespace scneugm
