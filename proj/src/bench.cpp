#include "srcpsp/bench.hpp"

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"

namespace srcpsp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a(const std::string &text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void overlay_method_config(MethodSpec &spec, const std::string &label, const json &j) {
  if (!j.is_object()) throw ConfigError("method_config." + label + " must be an object");
  MethodConfig &cfg = spec.config;
  for (const auto &[key, value] : j.items()) {
    if (key == "gamma") {
      if (spec.kind == MethodKind::ProactiveQuantile) {
        throw ConfigError("method_config." + label + ": the quantile is part of the method name");
      }
      cfg.gamma = value.get<double>();
    } else if (key == "saa_gammas") {
      cfg.saa_gammas = value.get<std::vector<double>>();
    } else if (key == "time_limit_offline") {
      cfg.time_limit_offline = std::chrono::duration<double>(value.get<double>());
    } else if (key == "time_limit_saa") {
      cfg.time_limit_saa = std::chrono::duration<double>(value.get<double>());
    } else if (key == "time_limit_reschedule") {
      cfg.time_limit_reschedule = std::chrono::duration<double>(value.get<double>());
    } else if (key == "node_limit") {
      cfg.node_limit = value.get<std::int64_t>();
    } else {
      throw ConfigError("method_config." + label + ": unknown key '" + key + "'");
    }
  }
}

std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string format_ms(std::chrono::duration<double> d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", d.count() * 1000.0);
  return buf;
}

auto row_key(const ResultRow &r) {
  return std::tie(r.instance_set, r.run.instance, r.epsilon, r.run.sample, r.run.method);
}

// Runs body(0..count-1) on up to `workers` threads; the first exception stops
// the remaining jobs and is rethrown.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)> &body) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr failure;
  std::mutex guard;
  auto worker = [&] {
    for (std::size_t id; !failed && (id = next.fetch_add(1)) < count;) {
      try {
        body(id);
      } catch (...) {
        std::lock_guard lock(guard);
        if (!failure) failure = std::current_exception();
        failed = true;
      }
    }
  };
  const int threads = static_cast<int>(std::min<std::size_t>(std::max(1, workers), std::max<std::size_t>(1, count)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto &t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

bool has_wildcard(const std::string &s) { return s.find_first_of("*?[") != std::string::npos; }

}  // namespace

std::string instance_set_of(const std::string &path) {
  const std::string name = fs::path(path).parent_path().filename().string();
  return name.empty() ? "default" : name;
}

std::string format_epsilon(double epsilon) {
  std::ostringstream out;
  out << epsilon;
  return out.str();
}

BenchConfig BenchConfig::from_json(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &err) {
    throw ConfigError(std::string("config is not valid JSON: ") + err.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  BenchConfig cfg;
  std::vector<std::string> labels{"proactive_0.9", "proactive_saa", "reactive", "stnu"};
  json method_config = json::object();
  try {
    for (const auto &[key, value] : j.items()) {
      if (key == "instances") {
        cfg.instances = value.is_string() ? std::vector<std::string>{value.get<std::string>()}
                                          : value.get<std::vector<std::string>>();
      } else if (key == "instances_per_set") {
        cfg.instances_per_set = value.get<int>();
      } else if (key == "epsilons") {
        cfg.epsilons = value.get<std::vector<double>>();
      } else if (key == "samples_per_instance") {
        cfg.samples_per_instance = value.get<int>();
      } else if (key == "methods") {
        labels = value.get<std::vector<std::string>>();
      } else if (key == "method_config") {
        method_config = value;
      } else if (key == "perfect_information_time_limit") {
        cfg.perfect_information_time_limit = value.get<double>();
      } else if (key == "alpha") {
        cfg.alpha = value.get<double>();
      } else if (key == "parallelism") {
        cfg.parallelism = value.get<int>();
      } else if (key == "output_dir") {
        cfg.output_dir = value.get<std::string>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception &err) {
    throw ConfigError(std::string("config has a field of the wrong type: ") + err.what());
  }

  if (cfg.instances.empty()) throw ConfigError("config needs at least one entry in 'instances'");
  if (cfg.instances_per_set < 1) throw ConfigError("instances_per_set must be positive");
  if (cfg.samples_per_instance < 1) throw ConfigError("samples_per_instance must be positive");
  if (cfg.epsilons.empty()) throw ConfigError("config needs at least one epsilon");
  for (double e : cfg.epsilons) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw ConfigError("epsilons must be finite and non-negative");
  }
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (cfg.parallelism < 0) throw ConfigError("parallelism must be non-negative");
  if (!(cfg.perfect_information_time_limit > 0.0)) {
    throw ConfigError("perfect_information_time_limit must be positive");
  }
  if (labels.empty()) throw ConfigError("config needs at least one method");
  if (!method_config.is_object()) throw ConfigError("method_config must be an object");

  std::set<std::string> seen;
  for (const auto &label : labels) {
    if (!seen.insert(label).second) throw ConfigError("method '" + label + "' listed twice");
    MethodSpec spec;
    try {
      spec = MethodSpec::parse(label);
      if (method_config.contains(label)) overlay_method_config(spec, label, method_config[label]);
      spec.config.validate();
    } catch (const json::exception &err) {
      throw ConfigError("method_config." + label + ": " + err.what());
    } catch (const std::invalid_argument &err) {
      throw ConfigError(err.what());
    }
    cfg.methods.push_back(std::move(spec));
  }
  for (const auto &[key, value] : method_config.items()) {
    if (!seen.count(key)) throw ConfigError("method_config for unlisted method '" + key + "'");
  }
  return cfg;
}

BenchConfig BenchConfig::load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  BenchConfig cfg = from_json(buf.str());
  const fs::path base = fs::path(path).parent_path();
  for (auto &p : cfg.instances) {
    if (fs::path(p).is_relative()) p = (base / p).lexically_normal().string();
  }
  if (fs::path(cfg.output_dir).is_relative()) {
    cfg.output_dir = (base / cfg.output_dir).lexically_normal().string();
  }
  return cfg;
}

void write_results_header(std::ostream &out) { out << kResultsHeader << '\n'; }

void write_result_row(std::ostream &out, const ResultRow &row) {
  const MethodRun &r = row.run;
  for (const auto *text : {&row.instance_set, &r.instance, &r.method}) {
    if (text->find_first_of(",\n\r") != std::string::npos) {
      throw ConfigError("field '" + *text + "' cannot be written to CSV");
    }
  }
  out << row.instance_set << ',' << r.instance << ',' << format_epsilon(row.epsilon) << ',' << r.sample << ','
      << r.method << ',' << (r.feasible ? "true" : "false") << ',';
  if (r.makespan) out << *r.makespan;
  out << ',' << format_ms(r.time_offline) << ',' << format_ms(r.time_online) << ',';
  if (r.failure) out << to_string(*r.failure);
  out << ',' << r.seed << '\n';
}

void write_results(std::ostream &out, std::vector<ResultRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const ResultRow &a, const ResultRow &b) { return row_key(a) < row_key(b); });
  write_results_header(out);
  for (const auto &row : rows) write_result_row(out, row);
}

std::vector<ResultRow> read_results(std::istream &in) {
  std::string line;
  auto chomp = [](std::string &s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  };
  if (!std::getline(in, line)) throw ConfigError("results file is empty");
  chomp(line);
  if (line != kResultsHeader) throw ConfigError("results file has an unexpected header: " + line);

  std::vector<ResultRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    chomp(line);
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    const std::string where = "results line " + std::to_string(line_no) + ": ";
    if (f.size() != 11) throw ConfigError(where + "expected 11 fields, got " + std::to_string(f.size()));
    ResultRow row;
    try {
      std::size_t used = 0;
      auto whole = [&](const std::string &s) {
        if (used != s.size()) throw std::invalid_argument(s);
      };
      row.instance_set = f[0];
      row.run.instance = f[1];
      row.epsilon = std::stod(f[2], &used);
      whole(f[2]);
      row.run.sample = std::stoi(f[3], &used);
      whole(f[3]);
      row.run.method = f[4];
      if (f[5] == "true" || f[5] == "1") {
        row.run.feasible = true;
      } else if (f[5] != "false" && f[5] != "0") {
        throw std::invalid_argument(f[5]);
      }
      if (!f[6].empty()) {
        row.run.makespan = std::stoll(f[6], &used);
        whole(f[6]);
      }
      row.run.time_offline = std::chrono::duration<double>(std::stod(f[7], &used) / 1000.0);
      whole(f[7]);
      row.run.time_online = std::chrono::duration<double>(std::stod(f[8], &used) / 1000.0);
      whole(f[8]);
      if (!f[9].empty()) {
        row.run.failure = parse_failure_reason(f[9]);
        if (!row.run.failure) throw std::invalid_argument(f[9]);
      }
      row.run.seed = std::stoull(f[10], &used);
      whole(f[10]);
    } catch (const std::logic_error &err) {
      throw ConfigError(where + "malformed value '" + err.what() + "'");
    }
    if (row.run.feasible == row.run.failure.has_value()) {
      throw ConfigError(where + "feasible and failure_reason disagree");
    }
    if (row.run.feasible != row.run.makespan.has_value()) {
      throw ConfigError(where + "feasible runs need a makespan, failed runs must not have one");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::uint64_t sample_seed(std::uint64_t master, const std::string &instance_set, const std::string &instance,
                          int sample) {
  return mix_seed(mix_seed(master, fnv1a(instance_set + "/" + instance)), static_cast<std::uint64_t>(sample));
}

int default_parallelism() {
  if (const char *env = std::getenv("SRCPSP_JOBS")) {
    char *end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::string> expand_instance_paths(const std::vector<std::string> &patterns) {
  std::vector<std::string> out;
  for (const auto &pattern : patterns) {
    if (!has_wildcard(pattern)) {
      if (!fs::is_regular_file(pattern)) throw ConfigError("instance file '" + pattern + "' does not exist");
      out.push_back(pattern);
      continue;
    }
    glob_t g{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    if (rc == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) {
        if (fs::is_regular_file(g.gl_pathv[i])) out.emplace_back(g.gl_pathv[i]);
      }
    }
    globfree(&g);
    if (rc != 0 && rc != GLOB_NOMATCH) throw ConfigError("cannot expand '" + pattern + "'");
    if (rc == GLOB_NOMATCH) throw ConfigError("pattern '" + pattern + "' matched no files");
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

BenchSummary run_bench(const BenchConfig &config, const ProgressFn &on_row) {
  struct Loaded {
    std::string set;
    ProjectInstance inst;
  };
  std::map<std::string, std::vector<std::string>> by_set;
  for (const auto &path : expand_instance_paths(config.instances)) by_set[instance_set_of(path)].push_back(path);

  std::vector<Loaded> instances;
  for (auto &[set, paths] : by_set) {
    if (static_cast<int>(paths.size()) > config.instances_per_set) paths.resize(config.instances_per_set);
    for (const auto &p : paths) instances.push_back({set, load_psplib(p)});
  }

  struct Cell {
    std::size_t instance;
    double epsilon;
    int sample;
    StochasticInstance stoch;
    DurationSample durations;
    bool included = false;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (double eps : config.epsilons) {
      const StochasticInstance stoch = make_stochastic(instances[i].inst, eps);
      for (int k = 0; k < config.samples_per_instance; ++k) {
        const std::uint64_t seed = sample_seed(config.seed, instances[i].set, instances[i].inst.name, k);
        cells.push_back({i, eps, k, stoch, sample_durations(stoch, seed)});
      }
    }
  }

  const int workers = config.parallelism > 0 ? config.parallelism : default_parallelism();
  std::mutex sink;

  const std::chrono::duration<double> pi_limit(config.perfect_information_time_limit);
  parallel_for(cells.size(), workers, [&](std::size_t id) {
    Cell &cell = cells[id];
    cell.included = perfect_information_feasible(cell.stoch, cell.durations, pi_limit);
  });

  BenchSummary summary;
  std::vector<std::pair<std::size_t, std::size_t>> jobs;  // (cell, method)
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (!cells[c].included) {
      ++summary.excluded_samples;
      continue;
    }
    ++summary.included_samples;
    for (std::size_t m = 0; m < config.methods.size(); ++m) jobs.emplace_back(c, m);
  }

  parallel_for(jobs.size(), workers, [&](std::size_t id) {
    const Cell &cell = cells[jobs[id].first];
    const MethodSpec &spec = config.methods[jobs[id].second];
    ResultRow row{instances[cell.instance].set, cell.epsilon, run_method(spec, cell.stoch, cell.durations)};
    row.run.sample = cell.sample;
    row.run.starts.clear();
    std::lock_guard lock(sink);
    if (on_row) on_row(row);
    summary.rows.push_back(std::move(row));
  });

  std::sort(summary.rows.begin(), summary.rows.end(),
            [](const ResultRow &a, const ResultRow &b) { return row_key(a) < row_key(b); });
  return summary;
}

std::optional<double> feasibility_ratio(const std::vector<ResultRow> &rows, const std::string &method,
                                        const std::string &instance_set, double epsilon) {
  int total = 0, feasible = 0;
  for (const auto &r : rows) {
    if (r.run.method != method || r.instance_set != instance_set || r.epsilon != epsilon) continue;
    ++total;
    feasible += r.run.feasible;
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(feasible) / total;
}

std::string feasibility_table(const std::vector<ResultRow> &rows) {
  std::set<double> epsilons;
  std::set<std::string> sets, methods;
  for (const auto &r : rows) {
    epsilons.insert(r.epsilon);
    sets.insert(r.instance_set);
    methods.insert(r.run.method);
  }
  std::size_t width = 6;
  for (const auto &m : methods) width = std::max(width, m.size());

  std::ostringstream out;
  for (double eps : epsilons) {
    out << "epsilon = " << format_epsilon(eps) << '\n';
    out << std::left << std::setw(static_cast<int>(width) + 2) << "method";
    for (const auto &s : sets) out << std::right << std::setw(std::max<int>(8, static_cast<int>(s.size()) + 2)) << s;
    out << '\n';
    for (const auto &m : methods) {
      out << std::left << std::setw(static_cast<int>(width) + 2) << m;
      for (const auto &s : sets) {
        const auto ratio = feasibility_ratio(rows, m, s, eps);
        std::ostringstream cell;
        if (ratio) {
          cell << std::fixed << std::setprecision(2) << *ratio;
        } else {
          cell << '-';
        }
        out << std::right << std::setw(std::max<int>(8, static_cast<int>(s.size()) + 2)) << cell.str();
      }
      out << '\n';
    }
    out << '\n';
  }
  return out.str();
}

std::vector<MethodRun> cell_runs(const std::vector<ResultRow> &rows, const std::string &instance_set,
                                 double epsilon) {
  std::vector<MethodRun> out;
  for (const auto &r : rows) {
    if (r.instance_set == instance_set && r.epsilon == epsilon) out.push_back(r.run);
  }
  return out;
}

std::string comparison_report(const PartialOrdering &ordering) {
  std::ostringstream out;
  out << std::setprecision(4);
  out << "metric " << to_string(ordering.metric) << '\n';
  for (const auto &c : ordering.comparisons) {
    out << c.method_a << " vs " << c.method_b << ": " << c.pairs << " pairs\n";
    if (c.wilcoxon) {
      out << "  wilcoxon    z=" << c.wilcoxon->statistic << " p=" << c.wilcoxon->p_value
          << (c.wilcoxon->significant ? " significant" : "") << '\n';
    }
    if (c.proportion) {
      out << "  proportion  share_a=" << c.proportion->proportion.value_or(0.0) << " (" << c.proportion->wins_a
          << ":" << c.proportion->wins_b << ") z=" << c.proportion->statistic << " p=" << c.proportion->p_value
          << (c.proportion->significant ? " significant" : "") << '\n';
    }
    if (c.magnitude) {
      out << "  magnitude   n=" << c.magnitude->n_pairs << " mean_a=" << c.magnitude->mean_a.value_or(0.0)
          << " mean_b=" << c.magnitude->mean_b.value_or(0.0) << " t=" << c.magnitude->statistic
          << " p=" << c.magnitude->p_value << (c.magnitude->significant ? " significant" : "") << '\n';
    }
    for (const auto &note : c.notes) out << "  note: " << note << '\n';
  }
  out << "edges\n";
  for (const auto &e : ordering.edges) {
    out << "  " << e.better << " > " << e.worse << (e.strength == EdgeStrength::Strong ? " (strong)" : " (weak)")
        << '\n';
  }
  return out.str();
}

void write_bench_outputs(const BenchConfig &config, const BenchSummary &summary) {
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "results.csv");
    write_results(out, summary.rows);
    if (!out) throw ConfigError("cannot write " + (dir / "results.csv").string());
  }
  {
    std::ofstream out(dir / "feasibility.txt");
    out << feasibility_table(summary.rows);
    out << "samples kept " << summary.included_samples << ", excluded by perfect information "
        << summary.excluded_samples << '\n';
  }
  std::set<std::pair<std::string, double>> cells;
  for (const auto &r : summary.rows) cells.emplace(r.instance_set, r.epsilon);
  for (const auto &[set, eps] : cells) {
    const auto runs = cell_runs(summary.rows, set, eps);
    const std::string stem = set + "_eps" + format_epsilon(eps);
    std::ofstream report(dir / ("stats_" + stem + ".txt"));
    for (Metric m : {Metric::Quality, Metric::TimeOffline, Metric::TimeOnline}) {
      const PartialOrdering po = build_partial_ordering(runs, m, config.alpha);
      std::ofstream dot(dir / ("ordering_" + stem + "_" + to_string(m) + ".dot"));
      dot << po.to_dot();
      report << comparison_report(po) << '\n';
    }
  }
}

}  // namespace srcpsp
