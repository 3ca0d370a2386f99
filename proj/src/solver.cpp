#include "srcpsp/solver.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "srcpsp/stn.hpp"

namespace srcpsp {

Time Schedule::makespan(std::span<const int> durations) const {
  if (durations.size() != starts.size()) throw std::invalid_argument("makespan: size mismatch");
  Time m = 0;
  for (std::size_t j = 0; j < starts.size(); ++j) m = std::max(m, starts[j] + durations[j]);
  return m;
}

const char *to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Feasible: return "Feasible";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unknown: return "Unknown";
  }
  return "?";
}

std::optional<double> SolveOutcome::objective() const {
  if (!objective_sum) return std::nullopt;
  return static_cast<double>(*objective_sum) / scenario_count;
}

namespace {

struct Overload {
  Time time = 0;
  int resource = 0;
  int usage = 0;
  std::vector<int> active;  // activities running at `time` with positive demand
};

// Earliest instant at which some resource is overloaded, if any.
std::optional<Overload> first_overload(const ProjectInstance &inst, std::span<const int> durations,
                                       std::span<const Time> starts, bool collect_all,
                                       std::vector<ResourceViolation> *all) {
  std::optional<Overload> best;
  const int n = inst.node_count();
  std::vector<std::pair<Time, int>> events;  // (time, +/- (j+1)), ends sort before starts
  for (int r = 0; r < inst.resource_count(); ++r) {
    events.clear();
    for (int j = 0; j < n; ++j) {
      if (durations[j] <= 0 || inst.demands[r][j] <= 0) continue;
      events.emplace_back(starts[j], j + 1);
      events.emplace_back(starts[j] + durations[j], -(j + 1));
    }
    std::sort(events.begin(), events.end());
    int usage = 0;
    for (std::size_t i = 0; i < events.size();) {
      const Time t = events[i].first;
      for (; i < events.size() && events[i].first == t; ++i) {
        const int j = std::abs(events[i].second) - 1;
        usage += events[i].second > 0 ? inst.demands[r][j] : -inst.demands[r][j];
      }
      if (usage <= inst.capacities[r]) continue;
      if (all) all->push_back({r, t, usage, inst.capacities[r]});
      if (!best || t < best->time) {
        Overload o{t, r, usage, {}};
        for (int j = 0; j < n; ++j) {
          if (durations[j] > 0 && inst.demands[r][j] > 0 && starts[j] <= t &&
              t < starts[j] + durations[j]) {
            o.active.push_back(j);
          }
        }
        best = std::move(o);
      }
      if (!collect_all) break;
    }
  }
  return best;
}

class BranchAndBound {
public:
  BranchAndBound(const ProjectInstance &inst, const std::vector<std::vector<int>> &scenarios,
                 const SolveOptions &options)
      : inst_(inst), scenarios_(scenarios), options_(options), n_(inst.node_count()) {}

  SolveOutcome run() {
    const auto t0 = std::chrono::steady_clock::now();
    deadline_ = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                         options_.time_limit);
    SolveOutcome out;
    out.scenario_count = static_cast<int>(scenarios_.size());

    out_edges_.assign(n_, {});
    dist_.assign(n_, 0);
    bool consistent = build_root();

    if (consistent) {
      if (options_.warm_start) try_warm_start(*options_.warm_start);
      search();
    }

    out.nodes_explored = nodes_;
    out.wall_time = std::chrono::steady_clock::now() - t0;
    if (incumbent_) {
      out.schedule = Schedule{*incumbent_};
      out.objective_sum = incumbent_sum_;
      out.status = stopped_ ? SolveStatus::Feasible : SolveStatus::Optimal;
    } else {
      out.status = (!consistent || !stopped_) ? SolveStatus::Infeasible : SolveStatus::Unknown;
    }
    return out;
  }

private:
  struct Arc {
    int to;
    Time weight;
  };

  bool build_root() {
    for (int j = 1; j < n_; ++j) push_arc(inst_.source(), j, 0);
    for (const auto &c : inst_.constraints) push_arc(c.from, c.to, c.weight);
    for (const auto &[j, t] : options_.fixed) {
      check_index(j);
      push_arc(0, j, t);
      push_arc(j, 0, -t);
    }
    for (const auto &[j, t] : options_.release) {
      check_index(j);
      push_arc(0, j, t);
    }
    std::deque<int> queue;
    for (int j = 0; j < n_; ++j) queue.push_back(j);
    return relax(queue);
  }

  void check_index(int j) const {
    if (j < 0 || j >= n_) throw std::invalid_argument("solve: activity index out of range");
  }

  void push_arc(int from, int to, Time w) {
    out_edges_[from].push_back({to, w});
    if (w > 0) positive_sum_ += w;
  }

  void pop_arc(int from) {
    Time w = out_edges_[from].back().weight;
    out_edges_[from].pop_back();
    if (w > 0) positive_sum_ -= w;
  }

  // Label-correcting longest-path update; false on a positive cycle or when
  // the source is pushed off time 0.
  bool relax(std::deque<int> &queue) {
    std::vector<char> queued(n_, 0);
    for (int v : queue) queued[v] = 1;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      queued[u] = 0;
      for (const Arc &a : out_edges_[u]) {
        Time cand = dist_[u] + a.weight;
        if (cand <= dist_[a.to]) continue;
        trail_.emplace_back(a.to, dist_[a.to]);
        dist_[a.to] = cand;
        if (a.to == 0 || cand > positive_sum_) return false;
        if (!queued[a.to]) {
          queued[a.to] = 1;
          queue.push_back(a.to);
        }
      }
    }
    return true;
  }

  bool add_ordering(int from, int to, Time w) {
    push_arc(from, to, w);
    if (dist_[from] + w <= dist_[to]) return true;
    std::deque<int> queue{from};
    return relax(queue);
  }

  void undo(std::size_t trail_mark, int arc_from) {
    while (trail_.size() > trail_mark) {
      auto [v, old] = trail_.back();
      trail_.pop_back();
      dist_[v] = old;
    }
    pop_arc(arc_from);
  }

  Time bound_sum() const {
    Time sum = 0;
    for (const auto &d : scenarios_) {
      Time m = 0;
      for (int j = 0; j < n_; ++j) m = std::max(m, dist_[j] + d[j]);
      sum += m;
    }
    return sum;
  }

  bool out_of_budget() {
    if (stopped_) return true;
    if (nodes_ >= options_.node_limit) stopped_ = true;
    if ((nodes_ & 255) == 0 && std::chrono::steady_clock::now() >= deadline_) stopped_ = true;
    return stopped_;
  }

  struct Conflict {
    int scenario;
    std::vector<int> set;
  };

  std::optional<Conflict> find_conflict() const {
    std::optional<Conflict> best;
    Time best_time = 0;
    for (std::size_t w = 0; w < scenarios_.size(); ++w) {
      auto o = first_overload(inst_, scenarios_[w], dist_, false, nullptr);
      if (!o) continue;
      if (best && o->time >= best_time) continue;
      const int cap = inst_.capacities[o->resource];
      auto active = o->active;
      const auto &dem = inst_.demands[o->resource];
      std::stable_sort(active.begin(), active.end(), [&](int a, int b) {
        return dem[a] != dem[b] ? dem[a] > dem[b] : a < b;
      });
      std::vector<int> set;
      int total = 0;
      for (int j : active) {
        set.push_back(j);
        total += dem[j];
        if (total > cap) break;
      }
      std::sort(set.begin(), set.end());
      best = Conflict{static_cast<int>(w), std::move(set)};
      best_time = o->time;
    }
    return best;
  }

  void search() {
    ++nodes_;
    if (out_of_budget()) return;
    const Time lb = bound_sum();
    if (incumbent_ && lb >= incumbent_sum_) return;

    auto conflict = find_conflict();
    if (!conflict) {
      incumbent_ = dist_;
      incumbent_sum_ = lb;
      return;
    }

    const auto &dur = scenarios_[conflict->scenario];
    struct Child {
      Time bound;
      int from, to;
    };
    std::vector<Child> children;
    for (int a : conflict->set) {
      for (int b : conflict->set) {
        if (a == b) continue;
        const std::size_t mark = trail_.size();
        if (add_ordering(a, b, dur[a])) children.push_back({bound_sum(), a, b});
        undo(mark, a);
      }
    }
    std::sort(children.begin(), children.end(), [](const Child &x, const Child &y) {
      return std::tie(x.bound, x.from, x.to) < std::tie(y.bound, y.from, y.to);
    });
    // Sibling k also excludes orderings 0..k-1: s_from >= s_to - d_from + 1.
    const std::size_t negation_mark = trail_.size();
    std::vector<int> negated;
    for (const Child &c : children) {
      if (incumbent_ && c.bound >= incumbent_sum_) break;
      const std::size_t mark = trail_.size();
      if (add_ordering(c.from, c.to, dur[c.from])) search();
      undo(mark, c.from);
      if (stopped_) break;
      negated.push_back(c.to);
      if (!add_ordering(c.to, c.from, 1 - dur[c.from])) break;
    }
    while (trail_.size() > negation_mark) {
      auto [v, old] = trail_.back();
      trail_.pop_back();
      dist_[v] = old;
    }
    for (auto it = negated.rbegin(); it != negated.rend(); ++it) pop_arc(*it);
  }

  void try_warm_start(const Schedule &ws) {
    if (static_cast<int>(ws.starts.size()) != n_) return;
    for (const auto &[j, t] : options_.fixed) {
      if (ws.starts[j] != t) return;
    }
    for (const auto &[j, t] : options_.release) {
      if (ws.starts[j] < t) return;
    }
    if (ws.starts[0] != 0) return;
    for (Time s : ws.starts) {
      if (s < 0) return;
    }
    Time sum = 0;
    for (const auto &d : scenarios_) {
      if (!check_schedule(inst_, d, ws).feasible) return;
      sum += ws.makespan(d);
    }
    incumbent_ = ws.starts;
    incumbent_sum_ = sum;
  }

  const ProjectInstance &inst_;
  const std::vector<std::vector<int>> &scenarios_;
  const SolveOptions &options_;
  const int n_;

  std::vector<std::vector<Arc>> out_edges_;
  std::vector<Time> dist_;
  std::vector<std::pair<int, Time>> trail_;
  Time positive_sum_ = 0;

  std::optional<std::vector<Time>> incumbent_;
  Time incumbent_sum_ = 0;
  std::int64_t nodes_ = 0;
  bool stopped_ = false;
  std::chrono::steady_clock::time_point deadline_;
};

}  // namespace

FeasibilityReport check_schedule(const ProjectInstance &inst, std::span<const int> durations,
                                 const Schedule &sched) {
  const auto n = static_cast<std::size_t>(inst.node_count());
  if (durations.size() != n || sched.starts.size() != n) {
    throw std::invalid_argument("check_schedule: vectors must have one entry per activity");
  }
  FeasibilityReport report;
  for (std::size_t k = 0; k < inst.constraints.size(); ++k) {
    const auto &c = inst.constraints[k];
    Time slack = sched.starts[c.to] - sched.starts[c.from] - c.weight;
    if (slack < 0) report.precedence_violations.push_back({static_cast<int>(k), slack});
  }
  first_overload(inst, durations, sched.starts, true, &report.resource_violations);
  report.feasible = report.precedence_violations.empty() && report.resource_violations.empty();
  return report;
}

SolveOutcome solve_scenarios(const ProjectInstance &inst,
                             const std::vector<std::vector<int>> &scenarios,
                             const SolveOptions &options) {
  if (scenarios.empty()) throw std::invalid_argument("solve: at least one scenario required");
  for (const auto &d : scenarios) {
    if (static_cast<int>(d.size()) != inst.node_count()) {
      throw std::invalid_argument("solve: duration vector size mismatch");
    }
  }
  SolveOutcome out = BranchAndBound(inst, scenarios, options).run();
  if (out.schedule) {
    for (const auto &d : scenarios) {
      if (!check_schedule(inst, d, *out.schedule).feasible) {
        throw std::logic_error("solver returned a schedule that fails check_schedule");
      }
    }
  }
  return out;
}

SolveOutcome solve(const ProjectInstance &inst, std::span<const int> durations,
                   const SolveOptions &options) {
  std::vector<std::vector<int>> one{std::vector<int>(durations.begin(), durations.end())};
  return solve_scenarios(inst, one, options);
}

std::optional<Time> critical_path_bound(const ProjectInstance &inst,
                                        std::span<const int> durations) {
  if (static_cast<int>(durations.size()) != inst.node_count()) {
    throw std::invalid_argument("critical_path_bound: size mismatch");
  }
  DistanceGraph g = temporal_graph(inst);
  for (int j = 0; j < inst.node_count(); ++j) {
    if (j != inst.sink()) g.add(j, inst.sink(), durations[j]);
  }
  auto r = propagate(g);
  if (auto *ok = std::get_if<Consistent>(&r)) return ok->potential[inst.sink()];
  return std::nullopt;
}

}  // namespace srcpsp
