#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "srcpsp/chaining.hpp"
#include "srcpsp/instance.hpp"
#include "srcpsp/solver.hpp"

namespace srcpsp {

enum class MethodKind { ProactiveSaa, ProactiveQuantile, Reactive, Stnu };

enum class FailureReason { SolverInfeasible, SolverTimeout, NotDc, ExecutionViolation };

const char *to_string(FailureReason reason);
std::optional<FailureReason> parse_failure_reason(const std::string &text);

struct MethodConfig {
  double gamma = 0.9;
  std::vector<double> saa_gammas{0.25, 0.5, 0.75, 0.9};
  std::chrono::duration<double> time_limit_offline{60.0};
  std::chrono::duration<double> time_limit_saa{300.0};
  std::chrono::duration<double> time_limit_reschedule{2.0};
  std::int64_t node_limit = 10'000'000;

  /// Defaults per method: gamma 1 for stnu, 0.9 otherwise.
  static MethodConfig defaults_for(MethodKind kind);
  /// Throws std::invalid_argument when a gamma is outside [0, 1] or a limit is negative.
  void validate() const;
};

/// A method together with its settings and the label used in result files,
/// e.g. "proactive_0.9", "proactive_saa", "reactive", "stnu".
struct MethodSpec {
  MethodKind kind = MethodKind::Stnu;
  MethodConfig config;

  std::string label() const;
  /// Accepts the labels above; "proactive_<g>" sets gamma to g.
  static MethodSpec parse(const std::string &label);
};

struct MethodRun {
  std::string method;
  std::string instance;
  int sample = 0;
  std::uint64_t seed = 0;
  bool feasible = false;
  std::optional<Time> makespan;
  std::chrono::duration<double> time_offline{0};
  std::chrono::duration<double> time_online{0};
  std::optional<FailureReason> failure;

  std::vector<Time> starts;              // executed starts, empty when nothing ran
  std::optional<double> offline_objective;
  int reschedules = 0;
};

MethodRun run_proactive_quantile(const StochasticInstance &stoch, const MethodConfig &cfg,
                                 const DurationSample &sample);
MethodRun run_proactive_saa(const StochasticInstance &stoch, const MethodConfig &cfg,
                            const DurationSample &sample);
MethodRun run_reactive(const StochasticInstance &stoch, const MethodConfig &cfg,
                       const DurationSample &sample);
MethodRun run_stnu(const StochasticInstance &stoch, const MethodConfig &cfg,
                   const DurationSample &sample);

/// STNU phase alone for a given partial order schedule: build, check, execute.
MethodRun run_stnu_pos(const StochasticInstance &stoch, const PartialOrderSchedule &pos,
                       const DurationSample &sample);

MethodRun run_method(const MethodSpec &spec, const StochasticInstance &stoch,
                     const DurationSample &sample);

/// True unless the instance is proven infeasible under the realized durations.
/// An inconclusive solve counts as feasible and logs a warning.
bool perfect_information_feasible(const StochasticInstance &stoch, const DurationSample &sample,
                                  std::chrono::duration<double> time_limit);

}  // namespace srcpsp
