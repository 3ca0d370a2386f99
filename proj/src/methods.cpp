#include "srcpsp/methods.hpp"

#include <algorithm>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "srcpsp/stnu.hpp"

namespace srcpsp {

namespace {

using Clock = std::chrono::steady_clock;
using Seconds = std::chrono::duration<double>;

Seconds since(Clock::time_point start) { return Clock::now() - start; }

MethodRun blank_run(const std::string &method, const StochasticInstance &stoch,
                    const DurationSample &sample) {
  MethodRun run;
  run.method = method;
  run.instance = stoch.base.name;
  run.seed = sample.seed;
  return run;
}

std::optional<FailureReason> offline_failure(const SolveOutcome &out) {
  if (out.schedule) return std::nullopt;
  return out.status == SolveStatus::Infeasible ? FailureReason::SolverInfeasible
                                               : FailureReason::SolverTimeout;
}

std::string format_gamma(double g) {
  std::ostringstream out;
  out << g;
  return out.str();
}

// Online phase shared by both proactive variants: the fixed starts are only checked.
void check_online(MethodRun &run, const StochasticInstance &stoch, const DurationSample &sample,
                  const Schedule &sched) {
  const auto t0 = Clock::now();
  const FeasibilityReport report = check_schedule(stoch.base, sample.durations, sched);
  run.time_online = since(t0);
  run.starts = sched.starts;
  run.feasible = report.feasible;
  if (report.feasible) {
    run.makespan = sched.makespan(sample.durations);
  } else {
    run.failure = FailureReason::ExecutionViolation;
  }
}

}  // namespace

const char *to_string(FailureReason reason) {
  switch (reason) {
    case FailureReason::SolverInfeasible: return "solver_infeasible";
    case FailureReason::SolverTimeout: return "solver_timeout";
    case FailureReason::NotDc: return "not_dc";
    case FailureReason::ExecutionViolation: return "execution_violation";
  }
  return "?";
}

std::optional<FailureReason> parse_failure_reason(const std::string &text) {
  for (auto r : {FailureReason::SolverInfeasible, FailureReason::SolverTimeout, FailureReason::NotDc,
                 FailureReason::ExecutionViolation}) {
    if (text == to_string(r)) return r;
  }
  return std::nullopt;
}

MethodConfig MethodConfig::defaults_for(MethodKind kind) {
  MethodConfig cfg;
  if (kind == MethodKind::Stnu) cfg.gamma = 1.0;
  return cfg;
}

void MethodConfig::validate() const {
  auto unit = [](double g) { return g >= 0.0 && g <= 1.0; };
  if (!unit(gamma)) throw std::invalid_argument("gamma must be in [0, 1]");
  if (!std::all_of(saa_gammas.begin(), saa_gammas.end(), unit)) {
    throw std::invalid_argument("saa_gammas must be in [0, 1]");
  }
  if (time_limit_offline.count() < 0 || time_limit_saa.count() < 0 ||
      time_limit_reschedule.count() < 0 || node_limit < 0) {
    throw std::invalid_argument("limits must be non-negative");
  }
}

std::string MethodSpec::label() const {
  switch (kind) {
    case MethodKind::ProactiveSaa: return "proactive_saa";
    case MethodKind::ProactiveQuantile: return "proactive_" + format_gamma(config.gamma);
    case MethodKind::Reactive: return "reactive";
    case MethodKind::Stnu: return "stnu";
  }
  return "?";
}

MethodSpec MethodSpec::parse(const std::string &label) {
  MethodSpec spec;
  if (label == "proactive_saa") {
    spec.kind = MethodKind::ProactiveSaa;
  } else if (label == "reactive") {
    spec.kind = MethodKind::Reactive;
  } else if (label == "stnu") {
    spec.kind = MethodKind::Stnu;
  } else if (label.rfind("proactive_", 0) == 0) {
    spec.kind = MethodKind::ProactiveQuantile;
    const std::string g = label.substr(10);
    std::size_t used = 0;
    double gamma = -1;
    try {
      gamma = std::stod(g, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used != g.size() || gamma < 0.0 || gamma > 1.0) {
      throw std::invalid_argument("bad quantile in method '" + label + "'");
    }
    spec.config = MethodConfig::defaults_for(spec.kind);
    spec.config.gamma = gamma;
    return spec;
  } else {
    throw std::invalid_argument("unknown method '" + label + "'");
  }
  spec.config = MethodConfig::defaults_for(spec.kind);
  return spec;
}

MethodRun run_proactive_quantile(const StochasticInstance &stoch, const MethodConfig &cfg,
                                 const DurationSample &sample) {
  MethodRun run = blank_run("proactive_" + format_gamma(cfg.gamma), stoch, sample);
  const auto t0 = Clock::now();
  const DurationSample estimate = quantile_durations(stoch, cfg.gamma);
  SolveOptions options;
  options.time_limit = cfg.time_limit_offline;
  options.node_limit = cfg.node_limit;
  const SolveOutcome out = solve(stoch.base, estimate.durations, options);
  run.time_offline = since(t0);
  if ((run.failure = offline_failure(out))) return run;
  run.offline_objective = out.objective();
  check_online(run, stoch, sample, *out.schedule);
  return run;
}

MethodRun run_proactive_saa(const StochasticInstance &stoch, const MethodConfig &cfg,
                            const DurationSample &sample) {
  if (cfg.saa_gammas.empty()) throw std::invalid_argument("saa_gammas must not be empty");
  MethodRun run = blank_run("proactive_saa", stoch, sample);
  const auto t0 = Clock::now();
  std::vector<std::vector<int>> scenarios;
  for (double g : cfg.saa_gammas) scenarios.push_back(quantile_durations(stoch, g).durations);
  SolveOptions options;
  options.time_limit = cfg.time_limit_saa;
  options.node_limit = cfg.node_limit;
  const SolveOutcome out = solve_scenarios(stoch.base, scenarios, options);
  run.time_offline = since(t0);
  if ((run.failure = offline_failure(out))) return run;
  run.offline_objective = out.objective();
  check_online(run, stoch, sample, *out.schedule);
  return run;
}

MethodRun run_reactive(const StochasticInstance &stoch, const MethodConfig &cfg,
                       const DurationSample &sample) {
  const ProjectInstance &inst = stoch.base;
  const int n = inst.node_count();
  MethodRun run = blank_run("reactive", stoch, sample);

  std::vector<int> estimate = quantile_durations(stoch, cfg.gamma).durations;
  const auto t0 = Clock::now();
  SolveOptions options;
  options.time_limit = cfg.time_limit_offline;
  options.node_limit = cfg.node_limit;
  const SolveOutcome first = solve(inst, estimate, options);
  run.time_offline = since(t0);
  if ((run.failure = offline_failure(first))) return run;
  run.offline_objective = first.objective();

  constexpr Time kNever = std::numeric_limits<Time>::max();
  std::vector<Time> plan = first.schedule->starts;
  std::vector<Time> started(n, -1);
  std::vector<bool> finished(n, false);
  const std::vector<int> &actual = sample.durations;

  Time now = 0;
  int done = 0;
  while (done < n) {
    Time next = kNever;
    for (int j = 0; j < n; ++j) {
      if (started[j] < 0) {
        next = std::min(next, plan[j]);
      } else if (!finished[j]) {
        next = std::min(next, started[j] + std::min(actual[j], estimate[j]));
      }
    }
    now = next;

    bool deviation = false;
    for (int j = 0; j < n; ++j) {
      if (started[j] < 0 || finished[j]) continue;
      if (started[j] + actual[j] == now) {
        finished[j] = true;
        ++done;
        if (actual[j] != estimate[j]) deviation = true;
        estimate[j] = actual[j];
      } else if (started[j] + estimate[j] == now) {
        // Still running at its expected finish: it takes at least one more unit.
        estimate[j] = static_cast<int>(now - started[j]) + 1;
        deviation = true;
      }
    }

    if (deviation) {
      SolveOptions re;
      re.time_limit = cfg.time_limit_reschedule;
      re.node_limit = cfg.node_limit;
      for (int j = 0; j < n; ++j) {
        if (started[j] >= 0) {
          re.fixed[j] = started[j];
        } else {
          re.release[j] = now;
        }
      }
      re.warm_start = Schedule{plan};
      const auto t1 = Clock::now();
      const SolveOutcome out = solve(inst, estimate, re);
      run.time_online += since(t1);
      ++run.reschedules;
      if (!out.schedule) {
        run.failure = out.status == SolveStatus::Infeasible ? FailureReason::ExecutionViolation
                                                            : FailureReason::SolverTimeout;
        return run;
      }
      plan = out.schedule->starts;
    }

    for (int j = 0; j < n; ++j) {
      if (started[j] >= 0 || plan[j] != now) continue;
      started[j] = now;
      if (actual[j] == 0) {
        finished[j] = true;
        ++done;
      }
    }
  }

  run.starts = started;
  const Schedule executed{started};
  const FeasibilityReport report = check_schedule(inst, actual, executed);
  run.feasible = report.feasible;
  if (report.feasible) {
    run.makespan = executed.makespan(actual);
  } else {
    run.failure = FailureReason::ExecutionViolation;
  }
  return run;
}

MethodRun run_stnu_pos(const StochasticInstance &stoch, const PartialOrderSchedule &pos,
                       const DurationSample &sample) {
  MethodRun run = blank_run("stnu", stoch, sample);
  const auto t0 = Clock::now();
  const Stnu stnu = build_stnu(pos, stoch);
  DcResult dc = dc_check(stnu);
  run.time_offline = since(t0);
  const Estnu *estnu = std::get_if<Estnu>(&dc);
  if (!estnu) {
    run.failure = FailureReason::NotDc;
    return run;
  }
  const auto t1 = Clock::now();
  const ExecutionTrace trace = rte_execute(*estnu, sample);
  run.time_online = since(t1);

  const int n = stoch.base.node_count();
  run.starts.resize(n);
  for (int j = 0; j < n; ++j) run.starts[j] = trace.times[Stnu::start_of(j)];
  const bool ok = trace.feasible &&
                  check_schedule(stoch.base, sample.durations, Schedule{run.starts}).feasible;
  run.feasible = ok;
  if (ok) {
    Time mk = 0;
    for (int j = 0; j < n; ++j) mk = std::max(mk, trace.times[Stnu::end_of(j)]);
    run.makespan = mk;
  } else {
    run.failure = FailureReason::ExecutionViolation;
  }
  return run;
}

MethodRun run_stnu(const StochasticInstance &stoch, const MethodConfig &cfg,
                   const DurationSample &sample) {
  const auto t0 = Clock::now();
  const DurationSample estimate = quantile_durations(stoch, cfg.gamma);
  SolveOptions options;
  options.time_limit = cfg.time_limit_offline;
  options.node_limit = cfg.node_limit;
  const SolveOutcome out = solve(stoch.base, estimate.durations, options);
  if (!out.schedule) {
    MethodRun run = blank_run("stnu", stoch, sample);
    run.time_offline = since(t0);
    run.failure = offline_failure(out);
    return run;
  }
  const PartialOrderSchedule pos = chain(stoch.base, estimate.durations, *out.schedule);
  const Seconds solve_time = since(t0);
  MethodRun run = run_stnu_pos(stoch, pos, sample);
  run.time_offline += solve_time;
  run.offline_objective = out.objective();
  return run;
}

MethodRun run_method(const MethodSpec &spec, const StochasticInstance &stoch,
                     const DurationSample &sample) {
  spec.config.validate();
  MethodRun run;
  switch (spec.kind) {
    case MethodKind::ProactiveSaa: run = run_proactive_saa(stoch, spec.config, sample); break;
    case MethodKind::ProactiveQuantile: run = run_proactive_quantile(stoch, spec.config, sample); break;
    case MethodKind::Reactive: run = run_reactive(stoch, spec.config, sample); break;
    case MethodKind::Stnu: run = run_stnu(stoch, spec.config, sample); break;
  }
  run.method = spec.label();
  return run;
}

bool perfect_information_feasible(const StochasticInstance &stoch, const DurationSample &sample,
                                  std::chrono::duration<double> time_limit) {
  SolveOptions options;
  options.time_limit = time_limit;
  const SolveOutcome out = solve(stoch.base, sample.durations, options);
  if (out.status == SolveStatus::Unknown) {
    std::clog << "warning: perfect-information solve of '" << stoch.base.name << "' (seed "
              << sample.seed << ") was inconclusive; keeping the sample\n";
    return true;
  }
  return out.status != SolveStatus::Infeasible;
}

}  // namespace srcpsp
