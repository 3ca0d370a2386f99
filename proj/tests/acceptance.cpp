#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <unistd.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "srcpsp/bench.hpp"
#include "srcpsp/chaining.hpp"
#include "srcpsp/generator.hpp"
#include "srcpsp/stn.hpp"
#include "srcpsp/stnu.hpp"
#include "support.hpp"

using namespace srcpsp;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const std::string kSource = SRCPSP_SOURCE_DIR;

struct Verdict {
  bool pass = true;
  std::vector<std::string> lines;

  void expect(bool ok, const std::string &what) {
    lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    pass = pass && ok;
  }
  void note(const std::string &what) { lines.push_back("     " + what); }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x, int precision = 4) {
  std::ostringstream out;
  out << std::setprecision(precision) << x;
  return out.str();
}

PartialOrderSchedule example_pos(std::vector<ChainEdge> edges) {
  PartialOrderSchedule pos;
  pos.base = fixture::example();
  pos.chain_edges = std::move(edges);
  std::sort(pos.chain_edges.begin(), pos.chain_edges.end());
  return pos;
}

std::map<int, Time> activity_starts(const ExecutionTrace &trace) {
  using namespace fixture;
  std::map<int, Time> out;
  for (int j : {a, b, c, d, e}) out[j] = trace.times[Stnu::start_of(j)];
  return out;
}

Verdict golden_suite() {
  using namespace fixture;
  Verdict v;
  const auto t0 = Clock::now();
  const ProjectInstance inst = example();

  Schedule stated{{0, 1, 3, 4, 0, 3, 0}};
  stated.starts[snk] = stated.makespan(inst.durations);
  const FeasibilityReport report = check_schedule(inst, inst.durations, stated);
  std::string why;
  for (const auto &r : report.resource_violations) {
    why += " resource " + std::to_string(r.resource) + " usage " + std::to_string(r.usage) + " > " +
           std::to_string(r.capacity) + " at t=" + std::to_string(r.time) + ";";
  }
  v.expect(report.feasible, "1a check accepts {a:1, b:3, c:4, d:0, e:3}" + (why.empty() ? "" : " (" + why + ")"));

  const SolveOutcome out = solve(inst, inst.durations);
  const auto brute = oracle::brute_force_makespan(inst, inst.durations, 15);
  const bool solved = out.status == SolveStatus::Optimal && out.schedule.has_value();
  const Time makespan = solved ? out.schedule->makespan(inst.durations) : -1;
  v.expect(solved && makespan <= 8 && brute && makespan == *brute,
           "1a solve Optimal, makespan " + std::to_string(makespan) + " <= 8, brute force " +
               (brute ? std::to_string(*brute) : "none"));

  const StochasticInstance stoch = example_stnu();
  const Stnu dc_net = build_stnu(example_pos({{a, d}, {d, c}, {b, e}, {a, b}}), stoch);
  const DcResult dc = dc_check(dc_net);
  v.expect(std::holds_alternative<Estnu>(dc), "1b chains {a->d, d->c, b->e, a->b}: Controllable");

  const DcResult bad = dc_check(build_stnu(example_pos({{d, a}, {a, e}, {e, c}, {a, b}}), stoch));
  const NotDc *witness = std::get_if<NotDc>(&bad);
  v.expect(witness && witness->length == -1,
           "1b chains {d->a, a->e, e->c, a->b}: NotDc with cycle length " +
               (witness ? std::to_string(witness->length) : std::string("n/a")));

  if (const Estnu *estnu = std::get_if<Estnu>(&dc)) {
    const std::vector<Time> one{1}, two{2};
    const std::map<int, Time> want1{{a, 0}, {b, 2}, {c, 5}, {d, 4}, {e, 7}};
    const std::map<int, Time> want2{{a, 0}, {b, 2}, {c, 6}, {d, 4}, {e, 7}};
    v.expect(activity_starts(rte_execute(*estnu, one)) == want1, "1c RTE d_d=1: {a:0, b:2, c:5, d:4, e:7}");
    v.expect(activity_starts(rte_execute(*estnu, two)) == want2, "1c RTE d_d=2: {a:0, b:2, c:6, d:4, e:7}");
  } else {
    v.expect(false, "1c RTE traces (network not controllable)");
  }

  const double elapsed = seconds_since(t0);
  v.expect(elapsed < 1.0, "total time " + fmt(elapsed, 3) + " s < 1 s");
  return v;
}

// Property suites. Each returns the number of cases checked and the number of failures.
struct Suite {
  int cases = 0;
  int failures = 0;
};

Suite shrink_invariance() {
  Suite s;
  std::mt19937_64 rng(101);
  for (std::uint64_t seed = 0; s.cases < 200 && seed < 2000; ++seed) {
    GeneratorParams params;
    params.activities = 4 + static_cast<int>(seed % 7);
    const ProjectInstance inst = generate_instance(params, 9000 + seed);
    const StochasticInstance stoch = make_stochastic(inst, 1.0);
    const double gamma = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const DurationSample q = quantile_durations(stoch, gamma);
    const SolveOutcome out = solve(inst, q.durations);
    if (!out.schedule) continue;
    ++s.cases;
    std::vector<int> smaller = q.durations;
    for (int j = 1; j <= inst.activity_count; ++j) {
      smaller[j] = std::uniform_int_distribution<int>(std::min(stoch.bounds[j].lb, q.durations[j]), q.durations[j])(rng);
    }
    s.failures += !check_schedule(inst, smaller, *out.schedule).feasible;
  }
  return s;
}

Suite pos_resource_safety() {
  Suite s;
  for (std::uint64_t seed = 0; s.cases < 200 && seed < 2000; ++seed) {
    GeneratorParams params;
    params.activities = 5 + static_cast<int>(seed % 8);
    const ProjectInstance inst = generate_instance(params, 5000 + seed);
    const StochasticInstance stoch = make_stochastic(inst, 1.0 + static_cast<double>(seed % 2));
    const DurationSample upper = quantile_durations(stoch, 1.0);
    SolveOptions opts;
    opts.time_limit = std::chrono::duration<double>(2.0);
    const SolveOutcome out = solve(inst, upper.durations, opts);
    if (!out.schedule) continue;
    const PartialOrderSchedule pos = chain(inst, upper.durations, *out.schedule);
    for (int k = 0; k < 5; ++k) {
      ++s.cases;
      const DurationSample sample = sample_durations(stoch, mix_seed(seed, k));
      const auto starts = earliest_schedule(pos.graph(sample.durations), {});
      s.failures += !starts || !check_schedule(inst, sample.durations, Schedule{*starts}).resource_violations.empty();
    }
  }
  return s;
}

Suite dc_soundness() {
  Suite s;
  for (std::uint64_t seed = 0; s.cases < 200 && seed < 2000; ++seed) {
    GeneratorParams params;
    params.activities = 5 + static_cast<int>(seed % 6);
    const ProjectInstance inst = generate_instance(params, 7000 + seed);
    const StochasticInstance stoch = make_stochastic(inst, 1.0);
    const DurationSample upper = quantile_durations(stoch, 1.0);
    SolveOptions opts;
    opts.time_limit = std::chrono::duration<double>(2.0);
    const SolveOutcome out = solve(inst, upper.durations, opts);
    if (!out.schedule) continue;
    const Stnu stnu = build_stnu(chain(inst, upper.durations, *out.schedule), stoch);
    const DcResult r = dc_check(stnu);
    const Estnu *estnu = std::get_if<Estnu>(&r);
    if (!estnu) continue;
    for (int k = 0; k < 10; ++k) {
      ++s.cases;
      const DurationSample sample = sample_durations(stoch, mix_seed(seed, 100 + k));
      const ExecutionTrace trace = rte_execute(*estnu, sample);
      bool ok = trace.feasible;
      for (const auto &x : stnu.ordinary_edges) {
        ok = ok && trace.times[x.to] - trace.times[x.from] <= x.weight;
      }
      s.failures += !ok;
    }
  }
  return s;
}

Suite solver_vs_brute_force() {
  Suite s;
  for (std::uint64_t seed = 0; s.cases < 200; ++seed) {
    const ProjectInstance inst = generate_instance(support::small_params(2 + static_cast<int>(seed % 4)), 3000 + seed);
    ++s.cases;
    const auto expected = oracle::brute_force_makespan(inst, inst.durations, support::oracle_horizon(inst, inst.durations));
    const SolveOutcome out = solve(inst, inst.durations);
    if (!expected) {
      s.failures += out.status != SolveStatus::Infeasible;
    } else {
      s.failures += out.status != SolveStatus::Optimal || out.schedule->makespan(inst.durations) != *expected;
    }
  }
  return s;
}

bool close(double x, double y) { return std::fabs(x - y) <= 1e-9 * std::max(1.0, std::fabs(x)); }

Suite stats_symmetry() {
  Suite s;
  std::mt19937_64 rng(77);
  while (s.cases < 200) {
    ++s.cases;
    const PairedSeries series = support::random_series(rng, 5 + static_cast<int>(rng() % 40), 0.15);
    const PairedSeries swapped = series.swapped();
    PairedSeries scaled = series;
    const double c = 0.1 + static_cast<double>(rng() % 100) / 7.0;
    for (auto &[x, y] : scaled.pairs) {
      x *= c;
      y *= c;
    }
    bool ok = true;
    try {
      const TestResult w = wilcoxon_pratt(series), ws = wilcoxon_pratt(swapped), wc = wilcoxon_pratt(scaled);
      ok = ok && close(w.statistic, -ws.statistic) && close(w.p_value, ws.p_value) && w.significant == wc.significant;
    } catch (const NoNonzeroDifferences &) {
    }
    try {
      const TestResult p = proportion_test(series), ps = proportion_test(swapped), pc = proportion_test(scaled);
      ok = ok && close(p.statistic, -ps.statistic) && p.significant == ps.significant && p.significant == pc.significant;
    } catch (const AllTies &) {
    }
    s.failures += !ok;
  }
  return s;
}

Verdict property_suites() {
  Verdict v;
  const auto t0 = Clock::now();
  const std::pair<const char *, Suite (*)()> suites[] = {
      {"quantile schedules stay feasible when durations shrink", shrink_invariance},
      {"partial order schedules are resource-safe under sampled durations", pos_resource_safety},
      {"execution of controllable networks never violates an edge", dc_soundness},
      {"solver optimum equals brute force for n <= 5", solver_vs_brute_force},
      {"statistical decisions are antisymmetric and scale-invariant", stats_symmetry},
  };
  for (const auto &[name, run] : suites) {
    const Suite s = run();
    v.expect(s.cases >= 200 && s.failures == 0,
             std::string(name) + ": " + std::to_string(s.cases) + " cases, " + std::to_string(s.failures) + " failures");
  }
  const double elapsed = seconds_since(t0);
  v.expect(elapsed < 60.0, "total time " + fmt(elapsed, 3) + " s < 60 s");
  return v;
}

Verdict statistical_oracles() {
  Verdict v;
  for (int n = 1; n <= 12; ++n) {
    double worst = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      std::vector<double> diffs(n);
      for (int i = 0; i < n; ++i) diffs[i] = (mask & (1u << i)) ? -(i + 1.0) : (i + 1.0);
      const double approx = wilcoxon_pratt(support::from_diffs(diffs)).p_value;
      worst = std::max(worst, std::fabs(approx - oracle::exact_wilcoxon_p(diffs)));
    }
    v.expect(worst <= 0.05, "wilcoxon n=" + std::to_string(n) + ": worst |p - exact p| = " + fmt(worst));
  }
  int ok = 0;
  for (const auto &c : support::kProportionCases) {
    const TestResult r = proportion_test(support::wins(c.n, c.w));
    ok += std::fabs(r.statistic - c.z) <= 1e-9 && std::fabs(r.p_value - c.p) <= 1e-9;
  }
  v.expect(ok == static_cast<int>(support::kProportionCases.size()) && ok >= 5,
           "proportion test matches " + std::to_string(ok) + "/" + std::to_string(support::kProportionCases.size()) +
               " hand computations to 1e-9");
  ok = 0;
  for (const auto &c : support::kMagnitudeCases) {
    const TestResult r = magnitude_test(c.s);
    ok += std::fabs(r.statistic - c.t) <= 1e-9 && std::fabs(r.p_value - c.p) <= 1e-9 &&
          std::fabs(*r.mean_a - c.ma) <= 1e-9 && std::fabs(*r.mean_b - c.mb) <= 1e-9;
  }
  v.expect(ok == static_cast<int>(support::kMagnitudeCases.size()) && ok >= 5,
           "magnitude test matches " + std::to_string(ok) + "/" + std::to_string(support::kMagnitudeCases.size()) +
               " hand computations to 1e-9");
  return v;
}

BenchConfig desk_config(const fs::path &out) {
  BenchConfig cfg = BenchConfig::from_json(R"({
    "instances": [")" + kSource + R"(/data/j10/*.sch"],
    "epsilons": [1],
    "samples_per_instance": 10,
    "methods": ["proactive_0.9", "proactive_saa", "reactive", "stnu"],
    "method_config": {
      "proactive_0.9": {"time_limit_offline": 60},
      "proactive_saa": {"time_limit_saa": 60},
      "reactive": {"time_limit_offline": 60},
      "stnu": {"time_limit_offline": 60}
    },
    "perfect_information_time_limit": 60,
    "seed": 2024
  })");
  cfg.output_dir = out.string();
  return cfg;
}

std::string without_time_columns(const fs::path &csv) {
  std::ifstream in(csv);
  std::ostringstream out;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        f.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i == 7 || i == 8) continue;
      out << f[i] << ';';
    }
    out << '\n';
  }
  return out.str();
}

double mean(const std::vector<double> &xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? std::nan("") : s / static_cast<double>(xs.size());
}

Verdict desk_reproduction(const fs::path &out, BenchSummary &summary) {
  Verdict v;
  const auto t0 = Clock::now();
  const BenchConfig cfg = desk_config(out);
  const auto instances = expand_instance_paths(cfg.instances);
  v.expect(instances.size() >= 10, std::to_string(instances.size()) + " j10 instances, epsilon 1, 10 samples");
  try {
    summary = run_bench(cfg);
    write_bench_outputs(cfg, summary);
  } catch (const std::exception &err) {
    v.expect(false, std::string("(i) bench aborted: ") + err.what());
    return v;
  }
  v.note("samples kept " + std::to_string(summary.included_samples) + ", excluded by perfect information " +
         std::to_string(summary.excluded_samples) + ", " + fmt(seconds_since(t0), 3) + " s");
  std::istringstream table(feasibility_table(summary.rows));
  for (std::string line; std::getline(table, line);) {
    if (!line.empty()) v.note(line);
  }

  std::map<std::string, std::vector<const MethodRun *>> by_method;
  for (const auto &row : summary.rows) by_method[row.run.method].push_back(&row.run);
  bool complete = true;
  for (const auto &spec : cfg.methods) {
    const auto &runs = by_method[spec.label()];
    const auto feasible = std::count_if(runs.begin(), runs.end(), [](const MethodRun *r) { return r->feasible; });
    complete = complete && static_cast<int>(runs.size()) == summary.included_samples && feasible > 0;
  }
  v.expect(complete && summary.included_samples > 0, "(i) all four methods complete end-to-end");

  const auto runs = cell_runs(summary.rows, "j10", 1.0);
  const PartialOrdering quality = build_partial_ordering(runs, Metric::Quality, cfg.alpha);
  const PairComparison *cmp = nullptr;
  for (const auto &c : quality.comparisons) {
    if ((c.method_a == "stnu" && c.method_b == "proactive_0.9") || (c.method_a == "proactive_0.9" && c.method_b == "stnu")) {
      cmp = &c;
    }
  }

  std::map<std::pair<std::string, int>, std::pair<std::optional<double>, std::optional<double>>> paired;
  for (const auto &r : runs) {
    if (r.method == "stnu") paired[{r.instance, r.sample}].first = metric_value(r, Metric::Quality);
    if (r.method == "proactive_0.9") paired[{r.instance, r.sample}].second = metric_value(r, Metric::Quality);
  }
  std::vector<double> norm_stnu, norm_pro;
  for (const auto &[key, p] : paired) {
    if (!p.first || !p.second) continue;
    const double m = (*p.first + *p.second) / 2.0;
    norm_stnu.push_back(m == 0.0 ? 1.0 : *p.first / m);
    norm_pro.push_back(m == 0.0 ? 1.0 : *p.second / m);
  }
  const double ms = mean(norm_stnu), mp = mean(norm_pro);
  v.expect(!norm_stnu.empty() && ms < mp, "(ii) double hits (" + std::to_string(norm_stnu.size()) +
                                              "): normalized makespan stnu " + fmt(ms) + " < proactive_0.9 " + fmt(mp));

  std::map<std::string, double> online;
  for (const auto &[method, list] : by_method) {
    std::vector<double> xs;
    for (const auto *r : list) {
      if (r->feasible) xs.push_back(r->time_online.count() * 1000.0);
    }
    online[method] = mean(xs);
  }
  const bool order = online["proactive_0.9"] < online["stnu"] && online["proactive_saa"] < online["stnu"] &&
                     online["stnu"] < online["reactive"];
  v.expect(order, "(iii) mean online ms: proactive_0.9 " + fmt(online["proactive_0.9"]) + ", proactive_saa " +
                      fmt(online["proactive_saa"]) + " < stnu " + fmt(online["stnu"]) + " < reactive " +
                      fmt(online["reactive"]));

  bool significant = false;
  std::string detail = "no comparison";
  if (cmp) {
    significant = (cmp->wilcoxon && cmp->wilcoxon->significant) || (cmp->proportion && cmp->proportion->significant);
    detail = "wilcoxon p " + (cmp->wilcoxon ? fmt(cmp->wilcoxon->p_value) : std::string("n/a")) + ", proportion p " +
             (cmp->proportion ? fmt(cmp->proportion->p_value) : std::string("n/a"));
  }
  const bool has = quality.has_edge("stnu", "proactive_0.9");
  v.expect(cmp && (!significant || has),
           "(iv) quality ordering " + std::string(has ? "has" : "lacks") + " stnu -> proactive_0.9 (" + detail + ")");
  return v;
}

Verdict determinism(const fs::path &first, const fs::path &second) {
  Verdict v;
  const BenchConfig cfg = desk_config(second);
  write_bench_outputs(cfg, run_bench(cfg));
  const std::string a = without_time_columns(first / "results.csv");
  const std::string b = without_time_columns(second / "results.csv");
  v.expect(!a.empty() && a == b, "two bench runs give identical results.csv without the wall-time columns");
  return v;
}

void report(int number, const std::string &title, const Verdict &v) {
  for (const auto &line : v.lines) std::cout << "    " << line << '\n';
  std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << number << ": " << title << "\n\n" << std::flush;
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / ("srcpsp_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);

  bool all = true;
  auto record = [&](int n, const std::string &title, const Verdict &v) {
    report(n, title, v);
    all = all && v.pass;
  };
  record(1, "worked-example golden suite", golden_suite());
  record(2, "property suites", property_suites());
  record(3, "statistical-test oracles", statistical_oracles());
  BenchSummary summary;
  const Verdict desk = desk_reproduction(root / "run1", summary);
  record(4, "desk-scale directional reproduction", desk);
  record(5, "determinism", determinism(root / "run1", root / "run2"));

  fs::remove_all(root);
  return all ? 0 : 1;
}
