#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srcpsp/instance.hpp"

namespace srcpsp {

struct Schedule {
  std::vector<Time> starts;  // one per activity, source and sink included

  /// max_j (s_j + d_j); always recomputed from the given durations.
  Time makespan(std::span<const int> durations) const;
};

enum class SolveStatus { Optimal, Feasible, Infeasible, Unknown };

const char *to_string(SolveStatus status);

struct SolveOutcome {
  SolveStatus status = SolveStatus::Unknown;
  std::optional<Schedule> schedule;
  std::int64_t nodes_explored = 0;
  std::chrono::duration<double> wall_time{0};
  /// Sum over scenarios of the scenario makespans of `schedule`.
  std::optional<Time> objective_sum;
  int scenario_count = 1;

  bool has_schedule() const { return schedule.has_value(); }
  /// Mean scenario makespan (the plain makespan for a single scenario).
  std::optional<double> objective() const;
};

struct PrecedenceViolation {
  int constraint = 0;  // index into ProjectInstance::constraints
  Time slack = 0;      // s_to - s_from - weight, negative when violated
};

struct ResourceViolation {
  int resource = 0;
  Time time = 0;
  int usage = 0;
  int capacity = 0;
};

struct FeasibilityReport {
  std::vector<PrecedenceViolation> precedence_violations;
  std::vector<ResourceViolation> resource_violations;
  bool feasible = true;
};

/// Start-to-start lags against `sched`, and per-resource usage of the
/// half-open intervals [s_j, s_j + d_j) at every event point.
FeasibilityReport check_schedule(const ProjectInstance &inst, std::span<const int> durations,
                                 const Schedule &sched);

struct SolveOptions {
  std::chrono::duration<double> time_limit{60.0};
  std::int64_t node_limit = 10'000'000;
  /// Activities whose start is pinned.
  std::map<int, Time> fixed;
  /// Lower bounds on start times (release dates).
  std::map<int, Time> release;
  std::optional<Schedule> warm_start;
};

/// Minimum-makespan RCPSP/max by conflict-resolution branch-and-bound.
SolveOutcome solve(const ProjectInstance &inst, std::span<const int> durations,
                   const SolveOptions &options = {});

/// One shared start vector feasible for every scenario, minimising the mean
/// scenario makespan.
SolveOutcome solve_scenarios(const ProjectInstance &inst,
                             const std::vector<std::vector<int>> &scenarios,
                             const SolveOptions &options = {});

/// Longest source-to-sink path in the temporal graph augmented with
/// j -> sink edges of weight d_j. nullopt when the temporal graph is
/// inconsistent.
std::optional<Time> critical_path_bound(const ProjectInstance &inst,
                                        std::span<const int> durations);

}  // namespace srcpsp
