#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "srcpsp/chaining.hpp"
#include "srcpsp/generator.hpp"
#include "srcpsp/stnu.hpp"

using namespace srcpsp;
using fixture::a;
using fixture::b;
using fixture::c;
using fixture::d;
using fixture::e;

namespace {

int S(int act) { return Stnu::start_of(act); }
int F(int act) { return Stnu::end_of(act); }

PartialOrderSchedule example_pos(std::vector<ChainEdge> edges) {
  PartialOrderSchedule pos;
  pos.base = fixture::example();
  pos.chain_edges = std::move(edges);
  std::sort(pos.chain_edges.begin(), pos.chain_edges.end());
  return pos;
}

const std::vector<ChainEdge> kDcChains{{a, d}, {d, c}, {b, e}, {a, b}};
const std::vector<ChainEdge> kOptimumChains{{d, a}, {a, e}, {e, c}, {a, b}};

Estnu controllable(const Stnu &stnu) {
  DcResult r = dc_check(stnu);
  REQUIRE(std::holds_alternative<Estnu>(r));
  return std::get<Estnu>(std::move(r));
}

// Edge set restricted to a timepoint subset, as (from, to, weight) triples.
std::set<std::tuple<int, int, Time>> edges_among(const Stnu &stnu, int lo, int hi) {
  std::set<std::tuple<int, int, Time>> out;
  for (const auto &x : stnu.ordinary_edges) {
    if (x.from >= lo && x.from < hi && x.to >= lo && x.to < hi) out.insert({x.from, x.to, x.weight});
  }
  return out;
}

// Random network for the game oracle: timepoint 0 is the origin, every
// timepoint lies in [0, horizon] relative to it.
Stnu random_stnu(std::mt19937_64 &rng, int horizon) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  Stnu s;
  s.add_timepoint("z");
  const int links = pick(1, 4);
  const int free_points = pick(0, links >= 3 ? 1 : 2);
  for (int i = 0; i < links; ++i) {
    const int act = s.add_timepoint("a" + std::to_string(i));
    const int con = s.add_timepoint("c" + std::to_string(i));
    const int low = pick(1, 3);
    s.add_link(act, con, low, low + pick(0, 4));
  }
  for (int i = 0; i < free_points; ++i) s.add_timepoint("x" + std::to_string(i));
  for (int v = 1; v < s.timepoint_count; ++v) {
    s.add_edge(0, v, horizon);
    s.add_edge(v, 0, 0);
  }
  const int extra = pick(1, 5);
  for (int i = 0; i < extra; ++i) {
    const int u = pick(1, s.timepoint_count - 1);
    const int v = pick(1, s.timepoint_count - 1);
    if (u == v) continue;
    s.add_edge(u, v, pick(-horizon / 2, horizon / 2));
  }
  return s;
}

void check_trace(const Stnu &stnu, const ExecutionTrace &trace, std::span<const Time> durations) {
  REQUIRE(trace.feasible);
  for (Time t : trace.times) CHECK(t >= 0);
  for (const auto &x : stnu.ordinary_edges) CHECK(trace.times[x.to] - trace.times[x.from] <= x.weight);
  for (std::size_t i = 0; i < stnu.contingent_links.size(); ++i) {
    const auto &l = stnu.contingent_links[i];
    CHECK(trace.times[l.contingent] == trace.times[l.activation] + durations[i]);
  }
}

std::vector<Time> random_durations(const Stnu &stnu, std::mt19937_64 &rng) {
  std::vector<Time> out;
  for (const auto &l : stnu.contingent_links) {
    out.push_back(std::uniform_int_distribution<Time>(l.low, l.high)(rng));
  }
  return out;
}

}  // namespace

TEST_CASE("network built from the walkthrough POS") {
  const Stnu stnu = build_stnu(example_pos(kDcChains), fixture::example_stnu());
  CHECK(stnu.timepoint_count == 14);
  REQUIRE(stnu.contingent_links.size() == 1);
  const ContingentLink &link = stnu.contingent_links[0];
  CHECK(link.activation == S(d));
  CHECK(link.contingent == F(d));
  CHECK(link.low == 1);
  CHECK(link.high == 2);
  CHECK(link.activity == d);

  const std::set<std::tuple<int, int, Time>> expected{
      {S(a), F(a), 2}, {F(a), S(a), -2}, {S(b), F(b), 5}, {F(b), S(b), -5},
      {S(c), F(c), 3}, {F(c), S(c), -3}, {S(e), F(e), 2}, {F(e), S(e), -2},
      {S(b), S(a), -2}, {S(c), S(b), -1}, {S(a), S(c), 6}, {S(e), S(d), -3}, {S(d), S(e), 3},
      {S(d), F(a), 0}, {S(c), F(d), 0}, {S(e), F(b), 0}, {S(b), F(a), 0}};
  CHECK(edges_among(stnu, S(a), F(e) + 1) == expected);
  CHECK(stnu.name(S(d)) == "start_4");
  CHECK_NOTHROW(stnu.validate());
}

TEST_CASE("fixed durations give a plain STN") {
  const StochasticInstance stoch = make_stochastic(fixture::example(), 0.0);
  PartialOrderSchedule pos = example_pos({});
  const Stnu stnu = build_stnu(pos, stoch);
  CHECK(stnu.contingent_links.empty());
  const Estnu estnu = controllable(stnu);
  CHECK(estnu.wait_edges().empty());

  ProjectInstance two = parse_psplib(std::string(
      "2 1 0 0\n0 1 2 1 2 [0] [0]\n1 1 1 3 [2]\n2 1 1 3 [1]\n3 1 0\n0 1 0 0\n1 1 2 1\n2 1 1 1\n3 1 0 0\n1\n"));
  PartialOrderSchedule chained = chain(two, two.durations, Schedule{{0, 0, 2, 3}});
  const Stnu small = build_stnu(chained, make_stochastic(two, 0.0));
  int cross = 0;
  for (const auto &x : small.ordinary_edges) cross += x.from == S(2) && x.to == F(1) && x.weight == 0;
  CHECK(cross == 1);
  CHECK_THROWS_AS(build_stnu(chained, fixture::example_stnu()), std::invalid_argument);
}

TEST_CASE("walkthrough network is controllable and executes as in the walkthrough") {
  const Stnu stnu = build_stnu(example_pos(kDcChains), fixture::example_stnu());
  const Estnu estnu = controllable(stnu);
  const auto &waits = estnu.wait_edges();
  CHECK(std::any_of(waits.begin(), waits.end(), [](const WaitEdge &w) {
    return w.from == S(c) && w.to == S(d) && w.weight == -2 && w.link == 0;
  }));
  for (const auto &w : waits) CHECK(w.weight < 0);

  const std::vector<Time> one{1}, two{2};
  const ExecutionTrace t1 = rte_execute(estnu, one);
  check_trace(stnu, t1, one);
  CHECK(t1.times[S(a)] == 0);
  CHECK(t1.times[S(b)] == 2);
  CHECK(t1.times[S(c)] == 5);
  CHECK(t1.times[S(d)] == 4);
  CHECK(t1.times[S(e)] == 7);

  const ExecutionTrace t2 = rte_execute(estnu, two);
  check_trace(stnu, t2, two);
  CHECK(t2.times[S(a)] == 0);
  CHECK(t2.times[S(b)] == 2);
  CHECK(t2.times[S(c)] == 6);
  CHECK(t2.times[S(d)] == 4);
  CHECK(t2.times[S(e)] == 7);
  CHECK(t2.makespan == 9);

  DurationSample sample;
  sample.durations = {0, 2, 5, 3, 1, 2, 0};
  const ExecutionTrace via_sample = rte_execute(estnu, sample);
  CHECK(via_sample.times == t1.times);
  CHECK(rte_execute(estnu, one).decisions.size() == t1.decisions.size());
}

TEST_CASE("chains of the optimum give the length -1 cycle") {
  const Stnu stnu = build_stnu(example_pos(kOptimumChains), fixture::example_stnu());
  const DcResult r = dc_check(stnu);
  REQUIRE(std::holds_alternative<NotDc>(r));
  const NotDc &bad = std::get<NotDc>(r);
  CHECK(bad.length == -1);
  std::vector<int> nodes = bad.cycle;
  std::sort(nodes.begin(), nodes.end());
  std::vector<int> expected{S(d), F(d), S(a), S(e), F(a)};
  std::sort(expected.begin(), expected.end());
  CHECK(nodes == expected);

  // Walk the cycle over ordinary edges and the upper-case edge of d.
  Time total = 0;
  for (std::size_t i = 0; i < bad.cycle.size(); ++i) {
    const int u = bad.cycle[i], v = bad.cycle[(i + 1) % bad.cycle.size()];
    std::optional<Time> w;
    for (const auto &x : stnu.ordinary_edges) {
      if (x.from == u && x.to == v) w = std::min(w.value_or(x.weight), x.weight);
    }
    if (u == F(d) && v == S(d)) w = -2;
    REQUIRE(w);
    total += *w;
  }
  CHECK(total == -1);
}

TEST_CASE("single fixed activity") {
  ProjectInstance one = parse_psplib(std::string("1 1 0 0\n0 1 1 1 [0]\n1 1 1 2 [4]\n2 1 0\n0 1 0 0\n1 1 4 1\n2 1 0 0\n1\n"));
  const Stnu stnu = build_stnu(chain(one, one.durations, Schedule{{0, 0, 4}}), make_stochastic(one, 0.0));
  const Estnu estnu = controllable(stnu);
  const ExecutionTrace trace = rte_execute(estnu, std::span<const Time>{});
  CHECK(trace.feasible);
  CHECK(trace.times[S(1)] == 0);
  CHECK(trace.times[F(1)] == 4);
}

TEST_CASE("execution contract") {
  const Stnu stnu = build_stnu(example_pos(kDcChains), fixture::example_stnu());
  const Estnu estnu = controllable(stnu);
  const std::vector<Time> none, wide{3};
  CHECK_THROWS_AS(rte_execute(estnu, none), RteContractViolation);
  CHECK_THROWS_AS(rte_execute(estnu, wide), RteContractViolation);

  Stnu broken;
  broken.add_timepoint("x");
  broken.add_timepoint("y");
  broken.add_link(0, 1, 3, 2);
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
  broken.contingent_links = {{0, 1, 1, 2, -1}, {0, 1, 1, 3, -1}};
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
  broken.contingent_links.clear();
  broken.add_edge(0, 5, 1);
  CHECK_THROWS_AS(dc_check(broken), std::invalid_argument);
}

TEST_CASE("dot export") {
  const Stnu stnu = build_stnu(example_pos(kDcChains), fixture::example_stnu());
  const std::string plain = to_dot(stnu);
  CHECK(plain.rfind("digraph stnu {", 0) == 0);
  CHECK(plain.find("style=dashed,label=\"c:1\"") != std::string::npos);
  CHECK(plain.find("style=dashed,label=\"C:-2\"") != std::string::npos);
  const std::string extended = to_dot(controllable(stnu));
  CHECK(extended.find("wait end_4:-2") != std::string::npos);
}

TEST_CASE("controllable networks from random instances always execute feasibly") {
  std::mt19937_64 rng(3);
  int networks = 0;
  for (std::uint64_t seed = 0; networks < 25 && seed < 400; ++seed) {
    GeneratorParams params;
    params.activities = 5 + static_cast<int>(seed % 6);
    const ProjectInstance inst = generate_instance(params, 700 + seed);
    const StochasticInstance stoch = make_stochastic(inst, 1.0);
    const DurationSample upper = quantile_durations(stoch, 1.0);
    SolveOptions opts;
    opts.time_limit = std::chrono::duration<double>(2.0);
    const SolveOutcome out = solve(inst, upper.durations, opts);
    if (!out.schedule) continue;
    const Stnu stnu = build_stnu(chain(inst, upper.durations, *out.schedule), stoch);
    const DcResult r = dc_check(stnu);
    if (!std::holds_alternative<Estnu>(r)) continue;
    ++networks;
    const Estnu &estnu = std::get<Estnu>(r);
    for (int k = 0; k < 200; ++k) {
      const DurationSample sample = sample_durations(stoch, mix_seed(seed, k));
      const ExecutionTrace trace = rte_execute(estnu, sample);
      REQUIRE(trace.feasible);
      CHECK(check_schedule(inst, sample.durations,
                           Schedule{[&] {
                             std::vector<Time> s;
                             for (int j = 0; j < inst.node_count(); ++j) s.push_back(trace.times[S(j)]);
                             return s;
                           }()})
                .feasible);
    }
  }
  CHECK(networks >= 10);
}

TEST_CASE("dc_check agrees with the game oracle") {
  std::mt19937_64 rng(2024);
  int dc = 0, not_dc = 0;
  for (int i = 0; i < 100; ++i) {
    const int horizon = std::uniform_int_distribution<int>(6, 12)(rng);
    const Stnu stnu = random_stnu(rng, horizon);
    const bool expected = oracle::dc_by_game(stnu, horizon);
    const DcResult r = dc_check(stnu);
    CAPTURE(i);
    CAPTURE(to_dot(stnu));
    CHECK(std::holds_alternative<Estnu>(r) == expected);
    if (const auto *estnu = std::get_if<Estnu>(&r)) {
      ++dc;
      for (int k = 0; k < 20; ++k) {
        const std::vector<Time> durations = random_durations(stnu, rng);
        check_trace(stnu, rte_execute(*estnu, durations), durations);
      }
    } else {
      ++not_dc;
    }
  }
  CHECK(dc >= 10);
  CHECK(not_dc >= 10);
}

TEST_CASE("removing uncertainty keeps a controllable network controllable") {
  std::mt19937_64 rng(99);
  int checked = 0;
  for (int i = 0; i < 300 && checked < 100; ++i) {
    const Stnu stnu = random_stnu(rng, 12);
    if (!std::holds_alternative<Estnu>(dc_check(stnu))) continue;
    ++checked;
    Stnu rigid = stnu;
    const std::size_t pick = rng() % rigid.contingent_links.size();
    const ContingentLink l = rigid.contingent_links[pick];
    rigid.contingent_links.erase(rigid.contingent_links.begin() + static_cast<long>(pick));
    const Time fixed = std::uniform_int_distribution<Time>(l.low, l.high)(rng);
    rigid.add_edge(l.activation, l.contingent, fixed);
    rigid.add_edge(l.contingent, l.activation, -fixed);
    CHECK(std::holds_alternative<Estnu>(dc_check(rigid)));
  }
  CHECK(checked >= 30);
}

TEST_CASE("execution is deterministic") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    const Stnu stnu = random_stnu(rng, 12);
    const DcResult r = dc_check(stnu);
    if (!std::holds_alternative<Estnu>(r)) continue;
    const std::vector<Time> durations = random_durations(stnu, rng);
    const ExecutionTrace x = rte_execute(std::get<Estnu>(r), durations);
    const ExecutionTrace y = rte_execute(std::get<Estnu>(r), durations);
    CHECK(x.times == y.times);
  }
}
