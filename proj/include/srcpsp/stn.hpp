#pragma once

#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "srcpsp/instance.hpp"

namespace srcpsp {

/// Difference constraint t[to] - t[from] >= weight (lower-bound convention).
struct LowerEdge {
  int from = 0;
  int to = 0;
  Time weight = 0;
};

struct DistanceGraph {
  int node_count = 0;
  std::vector<LowerEdge> edges;

  void add(int from, int to, Time weight) { edges.push_back({from, to, weight}); }
};

struct Consistent {
  std::vector<Time> potential;
};

/// A cycle whose lower-bound weights sum to a positive value, i.e. a negative
/// cycle in shortest-path form. `length` is reported in shortest-path form
/// (always < 0); `nodes` lists the cycle in traversal order without repeating
/// the first node.
struct NegativeCycle {
  std::vector<int> nodes;
  Time length = 0;
};

using PropagateResult = std::variant<Consistent, NegativeCycle>;

/// Minimal non-negative solution of the system (longest paths from a virtual
/// origin connected to every node with weight 0), or a witness cycle.
PropagateResult propagate(const DistanceGraph &g);

/// Minimal solution with node 0 anchored at time 0 and the given nodes pinned.
/// Returns nullopt when the pinned system is inconsistent.
std::optional<std::vector<Time>> earliest_schedule(const DistanceGraph &g,
                                                   const std::map<int, Time> &fixed);

/// Builds the temporal graph of an instance (constraints only, plus s_j >= s_0).
DistanceGraph temporal_graph(const ProjectInstance &inst);

}  // namespace srcpsp
