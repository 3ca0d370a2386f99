#include "srcpsp/stn.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace srcpsp {

PropagateResult propagate(const DistanceGraph &g) {
  const int n = g.node_count;
  for (const auto &e : g.edges) {
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
      throw std::invalid_argument("edge endpoint out of range");
    }
  }
  // Canonical edge order so witnesses do not depend on insertion order.
  std::vector<LowerEdge> edges = g.edges;
  std::sort(edges.begin(), edges.end(), [](const LowerEdge &a, const LowerEdge &b) {
    return std::tie(a.from, a.to, a.weight) < std::tie(b.from, b.to, b.weight);
  });

  std::vector<Time> dist(n, 0);
  std::vector<int> pred(n, -1);
  std::vector<Time> pred_weight(n, 0);
  int last_relaxed = -1;
  for (int round = 0; round <= n; ++round) {
    last_relaxed = -1;
    for (const auto &e : edges) {
      if (dist[e.from] + e.weight > dist[e.to]) {
        dist[e.to] = dist[e.from] + e.weight;
        pred[e.to] = e.from;
        pred_weight[e.to] = e.weight;
        last_relaxed = e.to;
      }
    }
    if (last_relaxed < 0) return Consistent{std::move(dist)};
  }

  // Still relaxing after n rounds: walking back n steps lands on the cycle.
  int v = last_relaxed;
  for (int i = 0; i < n; ++i) v = pred[v];
  std::vector<int> cycle;
  Time total = 0;
  int u = v;
  do {
    cycle.push_back(u);
    total += pred_weight[u];
    u = pred[u];
  } while (u != v);
  std::reverse(cycle.begin(), cycle.end());
  return NegativeCycle{std::move(cycle), -total};
}

std::optional<std::vector<Time>> earliest_schedule(const DistanceGraph &g,
                                                   const std::map<int, Time> &fixed) {
  DistanceGraph h = g;
  for (const auto &[node, t] : fixed) {
    h.add(0, node, t);
    h.add(node, 0, -t);
  }
  auto result = propagate(h);
  auto *ok = std::get_if<Consistent>(&result);
  if (!ok) return std::nullopt;
  // With every fixed value anchored to node 0, node 0 must stay at 0.
  if (g.node_count > 0 && ok->potential[0] != 0) return std::nullopt;
  return std::move(ok->potential);
}

DistanceGraph temporal_graph(const ProjectInstance &inst) {
  DistanceGraph g;
  g.node_count = inst.node_count();
  for (int j = 1; j < inst.node_count(); ++j) g.add(inst.source(), j, 0);
  for (const auto &c : inst.constraints) g.add(c.from, c.to, c.weight);
  return g;
}

}  // namespace srcpsp
