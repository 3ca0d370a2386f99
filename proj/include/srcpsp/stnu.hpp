#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "srcpsp/chaining.hpp"
#include "srcpsp/instance.hpp"

namespace srcpsp {

/// Requirement edge t[to] - t[from] <= weight (upper-bound convention).
struct UpperEdge {
  int from = 0;
  int to = 0;
  Time weight = 0;

  friend bool operator==(const UpperEdge &, const UpperEdge &) = default;
};

/// contingent - activation is chosen by nature in [low, high].
struct ContingentLink {
  int activation = 0;
  int contingent = 0;
  Time low = 0;
  Time high = 0;
  int activity = -1;  // originating activity, -1 for hand-built networks
};

struct Stnu {
  int timepoint_count = 0;
  std::vector<std::string> names;
  std::vector<UpperEdge> ordinary_edges;
  std::vector<ContingentLink> contingent_links;

  static int start_of(int activity) { return 2 * activity; }
  static int end_of(int activity) { return 2 * activity + 1; }

  int add_timepoint(std::string name);
  void add_edge(int from, int to, Time weight) { ordinary_edges.push_back({from, to, weight}); }
  void add_link(int activation, int contingent, Time low, Time high, int activity = -1) {
    contingent_links.push_back({activation, contingent, low, high, activity});
  }

  /// -1 when the timepoint is controllable.
  std::vector<int> incoming_link() const;
  std::string name(int tp) const;
  /// Throws std::invalid_argument on out-of-range nodes, low > high, low < 0,
  /// or a contingent timepoint with more than one incoming link.
  void validate() const;
};

/// "from may not execute before activation + (-weight) unless the contingent
/// timepoint of `link` has already executed": the edge from -> activation
/// with upper-case label C and weight `weight` (always negative).
struct WaitEdge {
  int from = 0;
  int to = 0;
  Time weight = 0;
  int link = 0;
};

/// Dynamically controllable STNU together with the edges derived while
/// checking it. Only dc_check creates one.
class Estnu {
public:
  const Stnu &base() const { return base_; }
  const std::vector<UpperEdge> &ordinary_edges() const { return ordinary_; }
  const std::vector<WaitEdge> &wait_edges() const { return waits_; }

private:
  friend class DcChecker;
  Stnu base_;
  std::vector<UpperEdge> ordinary_;
  std::vector<WaitEdge> waits_;
};

/// Semi-reducible negative cycle, listed in edge direction; `length` < 0.
struct NotDc {
  std::vector<int> cycle;
  Time length = 0;
};

using DcResult = std::variant<Estnu, NotDc>;

/// Start/end timepoint per activity; contingent links for activities with
/// lb < ub, rigid edge pairs otherwise; lag (i -> k, w) becomes
/// (start_k, -w, start_i); chain edge A -> B becomes (start_B, 0, end_A).
Stnu build_stnu(const PartialOrderSchedule &pos, const StochasticInstance &stoch);

/// Applies the no-case, upper-case, lower-case, cross-case and label-removal
/// reductions to quiescence. The network is controllable iff the AllMax
/// projection stays consistent throughout.
DcResult dc_check(const Stnu &stnu);

struct ExecutionStep {
  Time time = 0;
  std::vector<int> timepoints;
};

struct ExecutionTrace {
  std::vector<Time> times;  // -1 for timepoints that never executed
  bool feasible = false;
  Time makespan = 0;
  std::vector<ExecutionStep> decisions;
};

class RteContractViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Earliest-first real-time execution. `link_durations[i]` is the realized
/// duration of contingent link i, revealed when it fires.
ExecutionTrace rte_execute(const Estnu &estnu, std::span<const Time> link_durations);
/// Same, taking each link's duration from the sample entry of its activity.
ExecutionTrace rte_execute(const Estnu &estnu, const DurationSample &sample);

std::string to_dot(const Stnu &stnu);
std::string to_dot(const Estnu &estnu);

}  // namespace srcpsp
