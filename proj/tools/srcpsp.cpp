#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "srcpsp/bench.hpp"
#include "srcpsp/chaining.hpp"
#include "srcpsp/generator.hpp"
#include "srcpsp/instance.hpp"
#include "srcpsp/methods.hpp"
#include "srcpsp/solver.hpp"
#include "srcpsp/stats.hpp"
#include "srcpsp/stnu.hpp"

namespace fs = std::filesystem;
using namespace srcpsp;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kData = 2;

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::vector<std::string>> read_table(const std::string &path, const std::string &header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path + "'");
  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool first = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line != header) throw DataError(path + ": expected header '" + header + "'");
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 2) throw DataError(path + ":" + std::to_string(line_no) + ": expected two fields");
    rows.push_back(std::move(fields));
  }
  if (first) throw DataError(path + " is empty");
  return rows;
}

long long to_integer(const std::string &text, const std::string &where) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw DataError(where + ": '" + text + "' is not an integer");
  return v;
}

/// "activity,<column>" table with one row per activity 0..n+1 (dummies may be omitted).
std::vector<long long> read_activity_column(const std::string &path, const std::string &column,
                                            const ProjectInstance &inst, long long dummy_value) {
  std::vector<long long> values(inst.node_count(), -1);
  values[inst.source()] = dummy_value;
  values[inst.sink()] = -1;
  for (const auto &row : read_table(path, "activity," + column)) {
    const long long j = to_integer(row[0], path);
    if (j < 0 || j >= inst.node_count()) throw DataError(path + ": activity " + row[0] + " out of range");
    values[j] = to_integer(row[1], path);
  }
  return values;
}

std::vector<int> read_durations(const std::string &path, const ProjectInstance &inst) {
  auto raw = read_activity_column(path, "duration", inst, 0);
  if (raw[inst.sink()] < 0) raw[inst.sink()] = 0;
  std::vector<int> out(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) {
    if (raw[j] < 0) throw DataError(path + ": no duration for activity " + std::to_string(j));
    if (inst.is_dummy(static_cast<int>(j)) && raw[j] != 0) throw DataError(path + ": dummy durations must be 0");
    out[j] = static_cast<int>(raw[j]);
  }
  return out;
}

Schedule read_schedule(const std::string &path, const ProjectInstance &inst) {
  auto raw = read_activity_column(path, "start", inst, 0);
  Schedule s;
  s.starts.resize(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) {
    if (raw[j] < 0 && static_cast<int>(j) == inst.sink()) continue;
    if (raw[j] < 0) throw DataError(path + ": no start for activity " + std::to_string(j));
    s.starts[j] = raw[j];
  }
  if (raw[inst.sink()] < 0) {
    Time end = 0;
    for (int j = 0; j < inst.sink(); ++j) end = std::max<Time>(end, s.starts[j] + inst.durations[j]);
    s.starts[inst.sink()] = end;
  }
  return s;
}

void print_schedule(std::ostream &out, const Schedule &s) {
  out << "activity,start\n";
  for (std::size_t j = 0; j < s.starts.size(); ++j) out << j << ',' << s.starts[j] << '\n';
}

ProjectInstance load_instance(const std::string &path) {
  if (!fs::is_regular_file(path)) throw DataError("cannot read instance '" + path + "'");
  return load_psplib(path);
}

int cmd_solve(const std::string &file, double time_limit, const std::string &durations_path) {
  const ProjectInstance inst = load_instance(file);
  const std::vector<int> durations = durations_path.empty() ? inst.durations : read_durations(durations_path, inst);
  SolveOptions options;
  options.time_limit = std::chrono::duration<double>(time_limit);
  const SolveOutcome out = solve(inst, durations, options);
  std::cerr << "status " << to_string(out.status) << ", nodes " << out.nodes_explored << ", "
            << std::fixed << std::setprecision(3) << out.wall_time.count() << " s\n";
  if (!out.schedule) {
    std::cout << "# status " << to_string(out.status) << '\n';
    return kOk;
  }
  std::cout << "# status " << to_string(out.status) << " makespan " << out.schedule->makespan(durations) << '\n';
  print_schedule(std::cout, *out.schedule);
  return kOk;
}

int cmd_check(const std::string &file, const std::string &schedule_path, const std::string &durations_path) {
  const ProjectInstance inst = load_instance(file);
  const std::vector<int> durations = durations_path.empty() ? inst.durations : read_durations(durations_path, inst);
  const Schedule sched = read_schedule(schedule_path, inst);
  const FeasibilityReport report = check_schedule(inst, durations, sched);
  for (const auto &v : report.precedence_violations) {
    const auto &c = inst.constraints[v.constraint];
    std::cout << "precedence violated: s" << c.to << " - s" << c.from << " >= " << c.weight << " (slack " << v.slack
              << ")\n";
  }
  for (const auto &v : report.resource_violations) {
    std::cout << "resource " << v.resource << " over capacity at t=" << v.time << ": usage " << v.usage << " > "
              << v.capacity << '\n';
  }
  if (report.feasible) {
    std::cout << "feasible, makespan " << sched.makespan(durations) << '\n';
  } else {
    std::cout << "infeasible\n";
  }
  return kOk;
}

int cmd_simulate(const std::string &file, const std::string &method, double epsilon, int samples,
                 std::uint64_t seed, double time_limit, const std::string &out_path) {
  if (samples < 1) throw UsageError("--samples must be positive");
  if (!(epsilon >= 0.0)) throw UsageError("--epsilon must be non-negative");
  MethodSpec spec;
  try {
    spec = MethodSpec::parse(method);
  } catch (const std::invalid_argument &err) {
    throw UsageError(err.what());
  }
  if (time_limit > 0) {
    spec.config.time_limit_offline = std::chrono::duration<double>(time_limit);
    spec.config.time_limit_saa = std::chrono::duration<double>(time_limit);
  }
  const ProjectInstance inst = load_instance(file);
  const std::string set = instance_set_of(file);
  const StochasticInstance stoch = make_stochastic(inst, epsilon);

  std::ofstream file_out;
  std::ostream *out = &std::cout;
  bool header = true;
  if (!out_path.empty()) {
    header = !fs::exists(out_path) || fs::file_size(out_path) == 0;
    file_out.open(out_path, std::ios::app);
    if (!file_out) throw DataError("cannot write '" + out_path + "'");
    out = &file_out;
  }
  if (header) write_results_header(*out);
  for (int k = 0; k < samples; ++k) {
    const DurationSample sample = sample_durations(stoch, sample_seed(seed, set, inst.name, k));
    ResultRow row{set, epsilon, run_method(spec, stoch, sample)};
    row.run.sample = k;
    write_result_row(*out, row);
    out->flush();
  }
  return kOk;
}

int cmd_bench(const std::string &config_path, int jobs) {
  BenchConfig cfg = BenchConfig::load(config_path);
  if (jobs > 0) cfg.parallelism = jobs;
  fs::create_directories(cfg.output_dir);
  const fs::path partial = fs::path(cfg.output_dir) / "results.partial.csv";
  std::ofstream part(partial);
  write_results_header(part);
  std::size_t done = 0;
  const BenchSummary summary = run_bench(cfg, [&](const ResultRow &row) {
    write_result_row(part, row);
    part.flush();
    if (++done % 50 == 0) std::cerr << done << " runs finished\n";
  });
  part.close();
  write_bench_outputs(cfg, summary);
  fs::remove(partial);
  std::cout << feasibility_table(summary.rows);
  std::cout << "samples kept " << summary.included_samples << ", excluded by perfect information "
            << summary.excluded_samples << '\n';
  std::cout << "outputs in " << cfg.output_dir << '\n';
  return kOk;
}

int cmd_stats(const std::string &results_path, const std::string &metric_name, double alpha,
              const std::string &out_path, const std::string &set_filter, const std::vector<double> &eps_filter) {
  const auto metric = parse_metric(metric_name);
  if (!metric) throw UsageError("unknown metric '" + metric_name + "' (quality, time_offline, time_online)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  std::ifstream in(results_path);
  if (!in) throw DataError("cannot read '" + results_path + "'");
  std::vector<ResultRow> rows = read_results(in);

  std::set<std::pair<std::string, double>> cells;
  std::vector<MethodRun> runs;
  for (const auto &r : rows) {
    if (!set_filter.empty() && r.instance_set != set_filter) continue;
    if (!eps_filter.empty() && r.epsilon != eps_filter.front()) continue;
    cells.emplace(r.instance_set, r.epsilon);
    runs.push_back(r.run);
  }
  if (cells.empty()) throw DataError("no results match the selection");
  if (cells.size() > 1) {
    throw UsageError("results span several instance sets or epsilons; select one with --set and --epsilon");
  }
  const PartialOrdering po = build_partial_ordering(runs, *metric, alpha);
  std::ofstream dot(out_path);
  if (!dot) throw DataError("cannot write '" + out_path + "'");
  dot << po.to_dot();
  std::cout << comparison_report(po);
  return kOk;
}

int cmd_generate(int count, const GeneratorParams &params, std::uint64_t seed, const std::string &dir,
                 const std::string &prefix, bool feasible_only) {
  if (count < 1) throw UsageError("--count must be positive");
  fs::create_directories(dir);
  int written = 0;
  for (std::uint64_t k = 0; written < count; ++k) {
    if (k > static_cast<std::uint64_t>(count) * 1000) throw DataError("too few feasible instances for these parameters");
    ProjectInstance inst = generate_instance(params, mix_seed(seed, k));
    if (feasible_only) {
      SolveOptions options;
      options.time_limit = std::chrono::duration<double>(10.0);
      if (solve(inst, inst.durations, options).status != SolveStatus::Optimal) continue;
    }
    std::ostringstream name;
    name << prefix << std::setw(2) << std::setfill('0') << ++written;
    inst.name = name.str();
    const fs::path path = fs::path(dir) / (inst.name + ".sch");
    std::ofstream out(path);
    out << serialize_psplib(inst);
    if (!out) throw DataError("cannot write " + path.string());
    std::cout << path.string() << '\n';
  }
  return kOk;
}

int cmd_stnu_dot(const std::string &file, double epsilon, double gamma, const std::string &schedule_path,
                 bool extended, double time_limit) {
  const ProjectInstance inst = load_instance(file);
  const StochasticInstance stoch = make_stochastic(inst, epsilon);
  const DurationSample planned = quantile_durations(stoch, gamma);
  Schedule sched;
  if (!schedule_path.empty()) {
    sched = read_schedule(schedule_path, inst);
  } else {
    SolveOptions options;
    options.time_limit = std::chrono::duration<double>(time_limit);
    const SolveOutcome out = solve(inst, planned.durations, options);
    if (!out.schedule) throw DataError(std::string("no schedule for the planned durations: ") + to_string(out.status));
    sched = *out.schedule;
  }
  const PartialOrderSchedule pos = chain(inst, planned.durations, sched);
  const Stnu stnu = build_stnu(pos, stoch);
  if (!extended) {
    std::cout << to_dot(stnu);
    return kOk;
  }
  const DcResult dc = dc_check(stnu);
  if (const auto *bad = std::get_if<NotDc>(&dc)) {
    std::cerr << "network is not dynamically controllable; negative cycle of length " << bad->length << ":";
    for (int v : bad->cycle) std::cerr << ' ' << v;
    std::cerr << '\n';
    std::cout << to_dot(stnu);
    return kOk;
  }
  std::cout << to_dot(std::get<Estnu>(dc));
  return kOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Scheduling under duration uncertainty: solvers, STNU execution and benchmarking", "srcpsp"};
  app.require_subcommand(1);

  std::string file, durations, schedule, method, config, results, metric = "quality", out, set_filter, dir = ".",
                                                                    prefix = "inst";
  double time_limit = 60.0, epsilon = 1.0, alpha = 0.05, gamma = 1.0, sim_limit = 0.0;
  int samples = 10, jobs = 0, count = 10;
  std::uint64_t seed = 1;
  std::vector<double> eps_filter;
  bool extended = false, feasible_only = false;
  GeneratorParams gen;

  auto *solve_cmd = app.add_subcommand("solve", "Minimum-makespan schedule of an instance");
  solve_cmd->add_option("file", file, "Instance in .sch format")->required();
  solve_cmd->add_option("--time-limit", time_limit, "Seconds")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--durations", durations, "CSV 'activity,duration' overriding the nominal durations");

  auto *check_cmd = app.add_subcommand("check", "Check a schedule against an instance");
  check_cmd->add_option("--instance", file)->required();
  check_cmd->add_option("--schedule", schedule, "CSV 'activity,start'")->required();
  check_cmd->add_option("--durations", durations, "CSV 'activity,duration'");

  auto *sim_cmd = app.add_subcommand("simulate", "Run one method on sampled durations, CSV rows on stdout");
  sim_cmd->add_option("--instance", file)->required();
  sim_cmd->add_option("--method", method, "proactive_<q>, proactive_saa, reactive or stnu")->required();
  sim_cmd->add_option("--epsilon", epsilon);
  sim_cmd->add_option("--samples", samples);
  sim_cmd->add_option("--seed", seed);
  sim_cmd->add_option("--time-limit", sim_limit, "Offline solver limit in seconds");
  sim_cmd->add_option("--out", out, "Append rows to this CSV instead of stdout");

  auto *bench_cmd = app.add_subcommand("bench", "Run an experiment described by a JSON config");
  bench_cmd->add_option("--config", config)->required();
  bench_cmd->add_option("--jobs", jobs, "Worker threads (default: config, then $SRCPSP_JOBS)");

  auto *stats_cmd = app.add_subcommand("stats", "Pairwise tests and a DOT partial ordering");
  stats_cmd->add_option("--results", results)->required();
  stats_cmd->add_option("--metric", metric, "quality, time_offline or time_online");
  stats_cmd->add_option("--alpha", alpha);
  stats_cmd->add_option("--out", out, "DOT output")->required();
  stats_cmd->add_option("--set", set_filter, "Instance set to compare on");
  stats_cmd->add_option("--epsilon", eps_filter, "Epsilon to compare on")->expected(1);

  auto *gen_cmd = app.add_subcommand("generate", "Write random RCPSP/max instances");
  gen_cmd->add_option("--count", count);
  gen_cmd->add_option("--activities", gen.activities)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--resources", gen.resources)->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--seed", seed);
  gen_cmd->add_option("--out", dir, "Directory");
  gen_cmd->add_option("--prefix", prefix, "File name prefix");
  gen_cmd->add_flag("--feasible-only", feasible_only, "Skip instances without a schedule for the nominal durations");

  auto *dot_cmd = app.add_subcommand("stnu-dot", "DOT of the STNU (or, with --extended, the checked ESTNU)");
  dot_cmd->add_option("--instance", file)->required();
  dot_cmd->add_option("--epsilon", epsilon);
  dot_cmd->add_option("--gamma", gamma, "Quantile of the planned durations")->check(CLI::Range(0.0, 1.0));
  dot_cmd->add_option("--schedule", schedule, "CSV 'activity,start'; solved when absent");
  dot_cmd->add_option("--time-limit", time_limit)->check(CLI::PositiveNumber);
  dot_cmd->add_flag("--extended", extended);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*solve_cmd) return cmd_solve(file, time_limit, durations);
    if (*check_cmd) return cmd_check(file, schedule, durations);
    if (*sim_cmd) return cmd_simulate(file, method, epsilon, samples, seed, sim_limit, out);
    if (*bench_cmd) return cmd_bench(config, jobs);
    if (*stats_cmd) return cmd_stats(results, metric, alpha, out, set_filter, eps_filter);
    if (*gen_cmd) return cmd_generate(count, gen, seed, dir, prefix, feasible_only);
    if (*dot_cmd) return cmd_stnu_dot(file, epsilon, gamma, schedule, extended, time_limit);
  } catch (const UsageError &err) {
    std::cerr << "error: " << err.what() << '\n';
    return kUsage;
  } catch (const std::exception &err) {
    std::cerr << "error: " << err.what() << '\n';
    return kData;
  }
  return kUsage;
}
