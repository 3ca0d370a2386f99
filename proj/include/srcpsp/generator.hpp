#pragma once

#include <cstdint>

#include "srcpsp/instance.hpp"

namespace srcpsp {

/// Shape of randomly generated RCPSP/max instances.
struct GeneratorParams {
  int activities = 10;
  int resources = 5;
  int max_duration = 10;
  int max_demand = 10;
  int min_capacity = 10;
  int max_capacity = 20;
  double arc_density = 0.25;      // probability of a forward arc i -> j for i < j
  double max_lag_share = 0.3;     // fraction of forward arcs that also get a maximal lag
  int max_lag_slack = 6;          // extra room added on top of the implied longest path
  double demand_density = 0.6;    // probability that an activity uses a given resource
};

/// Temporally consistent random instance; same params and seed give the same instance.
ProjectInstance generate_instance(const GeneratorParams &params, std::uint64_t seed);

}  // namespace srcpsp
