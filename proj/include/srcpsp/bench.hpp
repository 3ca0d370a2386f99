#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srcpsp/methods.hpp"
#include "srcpsp/stats.hpp"

namespace srcpsp {

/// Experiment description, read from JSON:
///
///   {
///     "instances": ["data/j10/*.sch"],     // files or globs; set = parent directory
///     "instances_per_set": 50,
///     "epsilons": [1, 2],
///     "samples_per_instance": 10,
///     "methods": ["proactive_0.9", "proactive_saa", "reactive", "stnu"],
///     "method_config": { "reactive": { "gamma": 0.9, "time_limit_reschedule": 2 } },
///     "perfect_information_time_limit": 60,
///     "alpha": 0.05,
///     "parallelism": 0,                    // 0: $SRCPSP_JOBS, else hardware threads
///     "output_dir": "results",
///     "seed": 1
///   }
///
/// method_config entries may set gamma, saa_gammas, time_limit_offline,
/// time_limit_saa, time_limit_reschedule (seconds) and node_limit.
struct BenchConfig {
  std::vector<std::string> instances;
  int instances_per_set = 50;
  std::vector<double> epsilons{1.0, 2.0};
  int samples_per_instance = 10;
  std::vector<MethodSpec> methods;
  double perfect_information_time_limit = 60.0;
  double alpha = 0.05;
  int parallelism = 0;
  std::string output_dir = "results";
  std::uint64_t seed = 1;

  /// Throws ConfigError on schema violations.
  static BenchConfig from_json(const std::string &text);
  static BenchConfig load(const std::string &path);
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// One results row: a MethodRun plus its experiment cell.
struct ResultRow {
  std::string instance_set;
  double epsilon = 0.0;
  MethodRun run;
};

inline constexpr const char *kResultsHeader =
    "instance_set,instance,epsilon,sample,method,feasible,makespan,time_offline_ms,"
    "time_online_ms,failure_reason,seed";

void write_results_header(std::ostream &out);
void write_result_row(std::ostream &out, const ResultRow &row);
/// Header plus rows, sorted by (set, instance, epsilon, sample, method).
void write_results(std::ostream &out, std::vector<ResultRow> rows);
/// Throws ConfigError on a bad header or malformed row.
std::vector<ResultRow> read_results(std::istream &in);

/// Seed of sample k of an instance, shared by every method and epsilon.
std::uint64_t sample_seed(std::uint64_t master, const std::string &instance_set,
                          const std::string &instance, int sample);

/// Default worker count: $SRCPSP_JOBS when set and positive, else hardware threads.
int default_parallelism();

/// Glob expansion, sorted; literal paths pass through when they exist.
std::vector<std::string> expand_instance_paths(const std::vector<std::string> &patterns);

struct BenchSummary {
  std::vector<ResultRow> rows;
  int excluded_samples = 0;       // (instance, epsilon, sample) dropped by the perfect-information filter
  int included_samples = 0;
};

using ProgressFn = std::function<void(const ResultRow &)>;

/// Runs every (instance, epsilon, sample, method) job on a worker pool.
/// Rows come back sorted; `on_row` sees them in completion order.
BenchSummary run_bench(const BenchConfig &config, const ProgressFn &on_row = {});

/// Feasible runs over included runs of a cell; nullopt for an empty cell.
std::optional<double> feasibility_ratio(const std::vector<ResultRow> &rows, const std::string &method,
                                        const std::string &instance_set, double epsilon);

/// Methods x sets grid per epsilon, as plain text.
std::string feasibility_table(const std::vector<ResultRow> &rows);

/// MethodRuns of one (set, epsilon) cell.
std::vector<MethodRun> cell_runs(const std::vector<ResultRow> &rows, const std::string &instance_set,
                                 double epsilon);

/// Human-readable table of every pairwise comparison in an ordering.
std::string comparison_report(const PartialOrdering &ordering);

/// Writes results.csv, feasibility.txt and, per (set, epsilon, metric),
/// ordering_<set>_eps<e>_<metric>.dot plus stats_<set>_eps<e>.txt.
void write_bench_outputs(const BenchConfig &config, const BenchSummary &summary);

std::string format_epsilon(double epsilon);

/// Name of the directory holding an instance file ("default" when there is none).
std::string instance_set_of(const std::string &path);

}  // namespace srcpsp
