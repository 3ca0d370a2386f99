#pragma once

#include <span>
#include <utility>
#include <vector>

#include "srcpsp/instance.hpp"
#include "srcpsp/solver.hpp"
#include "srcpsp/stn.hpp"

namespace srcpsp {

/// "B starts after A ends".
struct ChainEdge {
  int predecessor = 0;
  int successor = 0;

  friend auto operator<=>(const ChainEdge &, const ChainEdge &) = default;
};

struct PartialOrderSchedule {
  ProjectInstance base;
  std::vector<ChainEdge> chain_edges;               // sorted, deduplicated
  std::vector<std::vector<std::vector<int>>> chains;  // [resource][unit] -> activities

  /// Temporal graph of the instance plus s_B - s_A >= d_A for every chain edge.
  DistanceGraph graph(std::span<const int> durations) const;
};

/// Threads the activities of a feasible schedule through per-unit resource
/// chains in start-time order. An activity needing q units of resource r
/// takes q chains whose last activity ends no later than its start, preferring
/// chains that end exactly at its start, then the earliest-ending ones, then
/// the lowest chain index. Empty chains count as ending at minus infinity.
PartialOrderSchedule chain(const ProjectInstance &inst, std::span<const int> durations,
                           const Schedule &sched);

/// True iff the schedule satisfies every chain edge under `durations`.
bool pos_respects_schedule(const PartialOrderSchedule &pos, const Schedule &sched,
                           std::span<const int> durations);

}  // namespace srcpsp
