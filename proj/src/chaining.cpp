#include "srcpsp/chaining.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace srcpsp {

DistanceGraph PartialOrderSchedule::graph(std::span<const int> durations) const {
  DistanceGraph g = temporal_graph(base);
  for (const auto &e : chain_edges) g.add(e.predecessor, e.successor, durations[e.predecessor]);
  return g;
}

PartialOrderSchedule chain(const ProjectInstance &inst, std::span<const int> durations,
                           const Schedule &sched) {
  const int n = inst.node_count();
  if (static_cast<int>(durations.size()) != n || static_cast<int>(sched.starts.size()) != n) {
    throw std::invalid_argument("chain: size mismatch");
  }
  PartialOrderSchedule pos;
  pos.base = inst;
  pos.chains.resize(inst.resource_count());

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return sched.starts[a] < sched.starts[b]; });

  constexpr Time kEmpty = std::numeric_limits<Time>::min();
  for (int r = 0; r < inst.resource_count(); ++r) {
    auto &chains = pos.chains[r];
    chains.assign(inst.capacities[r], {});
    std::vector<Time> chain_end(inst.capacities[r], kEmpty);

    for (int j : order) {
      const int need = inst.demands[r][j];
      if (need == 0) continue;
      const Time s = sched.starts[j];
      std::vector<int> eligible;
      for (int k = 0; k < inst.capacities[r]; ++k) {
        if (chain_end[k] <= s) eligible.push_back(k);
      }
      if (static_cast<int>(eligible.size()) < need) {
        throw std::logic_error("chain: activity " + std::to_string(j) +
                               " cannot be assigned; schedule is not resource feasible");
      }
      std::stable_sort(eligible.begin(), eligible.end(), [&](int a, int b) {
        const bool exact_a = chain_end[a] == s, exact_b = chain_end[b] == s;
        if (exact_a != exact_b) return exact_a;
        return chain_end[a] < chain_end[b];
      });
      for (int i = 0; i < need; ++i) {
        const int k = eligible[i];
        if (!chains[k].empty()) pos.chain_edges.push_back({chains[k].back(), j});
        chains[k].push_back(j);
        chain_end[k] = s + durations[j];
      }
    }
  }
  std::sort(pos.chain_edges.begin(), pos.chain_edges.end());
  pos.chain_edges.erase(std::unique(pos.chain_edges.begin(), pos.chain_edges.end()),
                        pos.chain_edges.end());
  return pos;
}

bool pos_respects_schedule(const PartialOrderSchedule &pos, const Schedule &sched,
                           std::span<const int> durations) {
  return std::all_of(pos.chain_edges.begin(), pos.chain_edges.end(), [&](const ChainEdge &e) {
    return sched.starts[e.successor] >= sched.starts[e.predecessor] + durations[e.predecessor];
  });
}

}  // namespace srcpsp
