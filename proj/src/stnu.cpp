#include "srcpsp/stnu.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "srcpsp/stn.hpp"

namespace srcpsp {

namespace {
constexpr Time kInf = std::numeric_limits<Time>::max() / 4;
}

int Stnu::add_timepoint(std::string label) {
  names.push_back(std::move(label));
  return timepoint_count++;
}

std::string Stnu::name(int tp) const {
  if (tp >= 0 && tp < static_cast<int>(names.size()) && !names[tp].empty()) return names[tp];
  return "t" + std::to_string(tp);
}

std::vector<int> Stnu::incoming_link() const {
  std::vector<int> link(timepoint_count, -1);
  for (std::size_t i = 0; i < contingent_links.size(); ++i) {
    link[contingent_links[i].contingent] = static_cast<int>(i);
  }
  return link;
}

void Stnu::validate() const {
  auto in_range = [&](int v) { return v >= 0 && v < timepoint_count; };
  for (const auto &e : ordinary_edges) {
    if (!in_range(e.from) || !in_range(e.to)) throw std::invalid_argument("stnu: edge out of range");
  }
  std::vector<int> seen(timepoint_count, 0);
  for (const auto &l : contingent_links) {
    if (!in_range(l.activation) || !in_range(l.contingent) || l.activation == l.contingent) {
      throw std::invalid_argument("stnu: bad contingent link endpoints");
    }
    if (l.low < 0 || l.low > l.high) throw std::invalid_argument("stnu: need 0 <= low <= high");
    if (++seen[l.contingent] > 1) {
      throw std::invalid_argument("stnu: contingent timepoint with two incoming links");
    }
  }
}

Stnu build_stnu(const PartialOrderSchedule &pos, const StochasticInstance &stoch) {
  const ProjectInstance &inst = pos.base;
  if (!(inst == stoch.base)) throw std::invalid_argument("build_stnu: instance mismatch");
  Stnu stnu;
  for (int j = 0; j < inst.node_count(); ++j) {
    stnu.add_timepoint("start_" + std::to_string(j));
    stnu.add_timepoint("end_" + std::to_string(j));
  }
  for (int j = 0; j < inst.node_count(); ++j) {
    const auto [lb, ub] = stoch.bounds[j];
    if (lb == ub) {
      stnu.add_edge(Stnu::start_of(j), Stnu::end_of(j), ub);
      stnu.add_edge(Stnu::end_of(j), Stnu::start_of(j), -lb);
    } else {
      stnu.add_link(Stnu::start_of(j), Stnu::end_of(j), lb, ub, j);
    }
  }
  for (const auto &c : inst.constraints) {
    stnu.add_edge(Stnu::start_of(c.to), Stnu::start_of(c.from), -c.weight);
  }
  for (const auto &e : pos.chain_edges) {
    stnu.add_edge(Stnu::start_of(e.successor), Stnu::end_of(e.predecessor), 0);
  }
  return stnu;
}

class DcChecker {
public:
  explicit DcChecker(const Stnu &stnu)
      : stnu_(stnu), n_(stnu.timepoint_count), k_(static_cast<int>(stnu.contingent_links.size())) {}

  DcResult run() {
    stnu_.validate();
    ord_.assign(static_cast<std::size_t>(n_) * n_, kInf);
    uc_.assign(static_cast<std::size_t>(k_) * n_, kInf);
    for (int i = 0; i < n_; ++i) ord(i, i) = 0;
    for (const auto &e : stnu_.ordinary_edges) ord(e.from, e.to) = std::min(ord(e.from, e.to), e.weight);
    for (int c = 0; c < k_; ++c) {
      const auto &l = stnu_.contingent_links[c];
      ord(l.activation, l.contingent) = std::min(ord(l.activation, l.contingent), l.high);
      ord(l.contingent, l.activation) = std::min(ord(l.contingent, l.activation), -l.low);
      uc(c, l.contingent) = -l.high;
    }
    drop_dominated_waits();

    // A cycle already present among the original edges is reported as is.
    if (auto cycle = allmax_cycle()) return *cycle;

    const long round_limit = 2L * n_ * n_ + 10;
    for (long round = 0;; ++round) {
      if (round > round_limit) return NotDc{{}, -1};
      if (!close_ordinary()) return allmax_cycle().value_or(NotDc{});
      const bool changed = apply_rules();
      if (auto cycle = allmax_cycle()) return *cycle;
      if (!changed) break;
    }
    return make_estnu();
  }

private:
  Time &ord(int i, int j) { return ord_[static_cast<std::size_t>(i) * n_ + j]; }
  Time &uc(int c, int x) { return uc_[static_cast<std::size_t>(c) * n_ + x]; }

  // Floyd-Warshall over ordinary edges (no-case rule); false on a negative diagonal.
  bool close_ordinary() {
    for (int k = 0; k < n_; ++k) {
      for (int i = 0; i < n_; ++i) {
        const Time ik = ord(i, k);
        if (ik >= kInf) continue;
        for (int j = 0; j < n_; ++j) {
          const Time kj = ord(k, j);
          if (kj >= kInf) continue;
          if (ik + kj < ord(i, j)) ord(i, j) = ik + kj;
        }
      }
    }
    for (int i = 0; i < n_; ++i) {
      if (ord(i, i) < 0) return false;
    }
    return true;
  }

  bool improve_uc(int c, int x, Time w) {
    if (x == stnu_.contingent_links[c].contingent) return false;
    if (w >= uc(c, x) || w >= ord(x, stnu_.contingent_links[c].activation)) return false;
    uc(c, x) = w;
    return true;
  }

  bool apply_rules() {
    bool changed = false;
    for (int c = 0; c < k_; ++c) {
      const auto &l = stnu_.contingent_links[c];
      // Upper-case: X --v--> Y --C:w--> A  =>  X --C:v+w--> A
      for (int y = 0; y < n_; ++y) {
        const Time w = uc(c, y);
        if (w >= kInf) continue;
        for (int x = 0; x < n_; ++x) {
          if (x == y || ord(x, y) >= kInf) continue;
          changed |= improve_uc(c, x, ord(x, y) + w);
        }
      }
      // Lower-case: A --c:low--> C --v--> W, v < 0  =>  A --low+v--> W
      for (int w = 0; w < n_; ++w) {
        const Time v = ord(l.contingent, w);
        if (w == l.contingent || v >= 0) continue;
        const Time cand = l.low + v;
        if (cand < ord(l.activation, w)) {
          ord(l.activation, w) = cand;
          changed = true;
        }
      }
      // Cross-case: A --c:low--> C --D:v--> A', v < 0, D != C  =>  A --D:low+v--> A'
      for (int d = 0; d < k_; ++d) {
        if (d == c) continue;
        const Time v = uc(d, l.contingent);
        if (v >= 0) continue;
        changed |= improve_uc(d, l.activation, l.low + v);
      }
    }
    changed |= remove_labels();
    return changed;
  }

  // Label removal: X --C:w--> A with w >= -low becomes an ordinary edge.
  bool remove_labels() {
    bool changed = false;
    for (int c = 0; c < k_; ++c) {
      const auto &l = stnu_.contingent_links[c];
      for (int x = 0; x < n_; ++x) {
        const Time w = uc(c, x);
        if (w >= kInf || w < -l.low) continue;
        if (w < ord(x, l.activation)) {
          ord(x, l.activation) = w;
          changed = true;
        }
        uc(c, x) = kInf;
      }
    }
    drop_dominated_waits();
    return changed;
  }

  void drop_dominated_waits() {
    for (int c = 0; c < k_; ++c) {
      const int a = stnu_.contingent_links[c].activation;
      for (int x = 0; x < n_; ++x) {
        if (uc(c, x) < kInf && ord(x, a) <= uc(c, x)) uc(c, x) = kInf;
      }
    }
  }

  std::optional<NotDc> allmax_cycle() {
    DistanceGraph g;
    g.node_count = n_;
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (i != j && ord(i, j) < kInf) g.add(j, i, -ord(i, j));
        if (i == j && ord(i, j) < 0) return NotDc{{i}, ord(i, j)};
      }
    }
    for (int c = 0; c < k_; ++c) {
      const int a = stnu_.contingent_links[c].activation;
      for (int x = 0; x < n_; ++x) {
        if (uc(c, x) >= kInf) continue;
        if (x == a) {
          if (uc(c, x) < 0) return NotDc{{a}, uc(c, x)};
          continue;
        }
        g.add(a, x, -uc(c, x));
      }
    }
    auto result = propagate(g);
    auto *cycle = std::get_if<NegativeCycle>(&result);
    if (!cycle) return std::nullopt;
    // Lower-bound edges run against the requirement edges.
    NotDc out{cycle->nodes, cycle->length};
    std::reverse(out.cycle.begin(), out.cycle.end());
    return out;
  }

  Estnu make_estnu() {
    Estnu e;
    e.base_ = stnu_;
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        if (i != j && ord(i, j) < kInf) e.ordinary_.push_back({i, j, ord(i, j)});
      }
    }
    for (int c = 0; c < k_; ++c) {
      const auto &l = stnu_.contingent_links[c];
      for (int x = 0; x < n_; ++x) {
        if (x != l.contingent && uc(c, x) < kInf) e.waits_.push_back({x, l.activation, uc(c, x), c});
      }
    }
    return e;
  }

  const Stnu &stnu_;
  const int n_;
  const int k_;
  std::vector<Time> ord_;
  std::vector<Time> uc_;
};

DcResult dc_check(const Stnu &stnu) { return DcChecker(stnu).run(); }

ExecutionTrace rte_execute(const Estnu &estnu, std::span<const Time> link_durations) {
  const Stnu &base = estnu.base();
  const int n = base.timepoint_count;
  const auto &links = base.contingent_links;
  if (link_durations.size() != links.size()) {
    throw RteContractViolation("rte_execute: one realized duration per contingent link required");
  }
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (link_durations[i] < links[i].low || link_durations[i] > links[i].high) {
      throw RteContractViolation("rte_execute: realized duration outside its contingent bounds");
    }
  }

  const std::vector<int> incoming = base.incoming_link();
  std::vector<std::vector<int>> activates(n);
  for (std::size_t i = 0; i < links.size(); ++i) activates[links[i].activation].push_back(static_cast<int>(i));

  struct Arc {
    int other;
    Time weight;
  };
  std::vector<std::vector<Arc>> out(n), in(n);
  for (const auto &e : estnu.ordinary_edges()) {
    out[e.from].push_back({e.to, e.weight});
    in[e.to].push_back({e.from, e.weight});
  }
  std::vector<std::vector<WaitEdge>> waits(n);
  for (const auto &w : estnu.wait_edges()) waits[w.from].push_back(w);

  ExecutionTrace trace;
  trace.times.assign(n, -1);
  std::vector<Time> firing(n, kInf);
  auto executed = [&](int v) { return trace.times[v] >= 0; };
  bool violated = false;
  Time now = 0;
  int remaining = n;

  auto record = [&](int tp, Time t) {
    trace.times[tp] = t;
    --remaining;
    if (trace.decisions.empty() || trace.decisions.back().time != t) trace.decisions.push_back({t, {}});
    trace.decisions.back().timepoints.push_back(tp);
    for (int link : activates[tp]) firing[links[link].contingent] = t + link_durations[link];
  };

  while (remaining > 0) {
    Time next_fire = kInf;
    for (int v = 0; v < n; ++v) {
      if (!executed(v) && firing[v] < next_fire) next_fire = firing[v];
    }

    int best = -1;
    Time best_time = kInf, best_ub = kInf;
    for (int x = 0; x < n; ++x) {
      if (executed(x) || incoming[x] >= 0) continue;
      bool blocked = false;
      Time lb = now;
      for (const Arc &a : out[x]) {
        if (executed(a.other)) {
          lb = std::max(lb, trace.times[a.other] - a.weight);
        } else if (a.weight < 0 || (a.weight == 0 && incoming[a.other] >= 0)) {
          blocked = true;
          break;
        }
      }
      if (blocked) continue;
      for (const WaitEdge &w : waits[x]) {
        if (executed(links[w.link].contingent)) continue;
        if (!executed(w.to)) {
          blocked = true;
          break;
        }
        lb = std::max(lb, trace.times[w.to] - w.weight);
      }
      if (blocked) continue;
      if (lb < best_time) {
        Time ub = kInf;
        for (const Arc &a : in[x]) {
          if (executed(a.other)) ub = std::min(ub, trace.times[a.other] + a.weight);
        }
        best = x;
        best_time = lb;
        best_ub = ub;
      }
    }

    if (next_fire < kInf && next_fire <= best_time) {
      now = next_fire;
      for (int v = 0; v < n; ++v) {
        if (!executed(v) && firing[v] == next_fire) record(v, next_fire);
      }
      continue;
    }
    if (best < 0) break;  // nothing can ever execute again
    if (best_time > best_ub) violated = true;
    now = best_time;
    record(best, best_time);
  }

  trace.feasible = !violated && remaining == 0;
  if (trace.feasible) {
    for (const auto &e : base.ordinary_edges) {
      if (trace.times[e.to] - trace.times[e.from] > e.weight) trace.feasible = false;
    }
  }
  for (Time t : trace.times) trace.makespan = std::max(trace.makespan, t);
  return trace;
}

ExecutionTrace rte_execute(const Estnu &estnu, const DurationSample &sample) {
  const auto &links = estnu.base().contingent_links;
  std::vector<Time> realized(links.size());
  for (std::size_t i = 0; i < links.size(); ++i) {
    const int activity = links[i].activity;
    if (activity < 0 || activity >= static_cast<int>(sample.durations.size())) {
      throw RteContractViolation("rte_execute: contingent link without a sampled activity");
    }
    realized[i] = sample.durations[activity];
  }
  return rte_execute(estnu, realized);
}

namespace {

void write_base(std::ostringstream &out, const Stnu &stnu) {
  for (int v = 0; v < stnu.timepoint_count; ++v) {
    out << "  n" << v << " [label=\"" << stnu.name(v) << "\"];\n";
  }
  for (const auto &e : stnu.ordinary_edges) {
    out << "  n" << e.from << " -> n" << e.to << " [label=\"" << e.weight << "\"];\n";
  }
  for (const auto &l : stnu.contingent_links) {
    out << "  n" << l.activation << " -> n" << l.contingent << " [style=dashed,label=\"c:" << l.low
        << "\"];\n";
    out << "  n" << l.contingent << " -> n" << l.activation << " [style=dashed,label=\"C:"
        << -l.high << "\"];\n";
  }
}

}  // namespace

std::string to_dot(const Stnu &stnu) {
  std::ostringstream out;
  out << "digraph stnu {\n";
  write_base(out, stnu);
  out << "}\n";
  return out.str();
}

std::string to_dot(const Estnu &estnu) {
  std::ostringstream out;
  out << "digraph estnu {\n";
  write_base(out, estnu.base());
  for (const auto &w : estnu.wait_edges()) {
    out << "  n" << w.from << " -> n" << w.to << " [style=dotted,color=red,label=\"wait "
        << estnu.base().name(estnu.base().contingent_links[w.link].contingent) << ":" << w.weight
        << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace srcpsp
