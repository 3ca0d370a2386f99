#include "srcpsp/generator.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <variant>

#include "srcpsp/stn.hpp"

namespace srcpsp {

ProjectInstance generate_instance(const GeneratorParams &params, std::uint64_t seed) {
  if (params.activities < 1 || params.resources < 0 || params.max_duration < 1 ||
      params.max_demand < 1 || params.min_capacity < 1 || params.max_capacity < params.min_capacity) {
    throw std::invalid_argument("generate_instance: bad parameters");
  }
  std::mt19937_64 rng(seed);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  const int n = params.activities;
  ProjectInstance inst;
  inst.activity_count = n;
  inst.durations.assign(n + 2, 0);
  for (int j = 1; j <= n; ++j) inst.durations[j] = uniform(1, params.max_duration);

  inst.demands.assign(params.resources, std::vector<int>(n + 2, 0));
  inst.capacities.assign(params.resources, 0);
  for (int r = 0; r < params.resources; ++r) {
    int peak = 0;
    for (int j = 1; j <= n; ++j) {
      if (chance(params.demand_density)) inst.demands[r][j] = uniform(1, params.max_demand);
      peak = std::max(peak, inst.demands[r][j]);
    }
    inst.capacities[r] = std::max(peak, uniform(params.min_capacity, params.max_capacity));
  }

  std::vector<TemporalConstraint> forward;
  std::vector<bool> has_pred(n + 2, false), has_succ(n + 2, false);
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      if (!chance(params.arc_density)) continue;
      forward.push_back({i, j, uniform(0, inst.durations[i])});
      has_pred[j] = has_succ[i] = true;
    }
  }
  for (int j = 1; j <= n; ++j) {
    if (!has_pred[j]) inst.constraints.push_back({0, j, 0});
  }
  inst.constraints.insert(inst.constraints.end(), forward.begin(), forward.end());
  for (int j = 1; j <= n; ++j) {
    if (!has_succ[j]) inst.constraints.push_back({j, n + 1, inst.durations[j]});
  }

  // Longest forward distances, used to size maximal lags so they start out satisfiable.
  constexpr Time kNone = -1;
  std::vector<std::vector<Time>> longest(n + 2, std::vector<Time>(n + 2, kNone));
  for (int i = 1; i <= n; ++i) longest[i][i] = 0;
  for (int i = n; i >= 1; --i) {
    for (const auto &c : forward) {
      if (c.from != i) continue;
      for (int k = 1; k <= n; ++k) {
        if (longest[c.to][k] != kNone) longest[i][k] = std::max(longest[i][k], c.weight + longest[c.to][k]);
      }
    }
  }
  for (const auto &c : forward) {
    if (!chance(params.max_lag_share)) continue;
    const Time span = longest[c.from][c.to] + uniform(0, params.max_lag_slack);
    inst.constraints.push_back({c.to, c.from, -span});
    if (std::holds_alternative<NegativeCycle>(propagate(temporal_graph(inst)))) {
      inst.constraints.pop_back();
    }
  }
  std::stable_sort(inst.constraints.begin(), inst.constraints.end(),
                   [](const TemporalConstraint &x, const TemporalConstraint &y) { return x.from < y.from; });
  inst.validate();
  return inst;
}

}  // namespace srcpsp
