#include "srcpsp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

namespace srcpsp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double two_sided_normal_p(double z) { return std::min(1.0, std::erfc(std::fabs(z) / std::sqrt(2.0))); }

double difference(const std::pair<double, double> &p) {
  if (std::isinf(p.first) && std::isinf(p.second)) return 0.0;
  return p.first - p.second;
}

// Ties survive rescaling even when the differences pick up rounding error.
bool same_magnitude(double x, double y) {
  if (x == y) return true;
  if (std::isinf(x) || std::isinf(y)) return false;
  return std::fabs(x - y) <= 1e-9 * std::max(std::fabs(x), std::fabs(y));
}

}  // namespace

PairedSeries PairedSeries::from_optional(const std::vector<std::optional<double>> &a,
                                         const std::vector<std::optional<double>> &b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired series of unequal length");
  PairedSeries s;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i] && !b[i]) continue;
    s.pairs.emplace_back(a[i].value_or(kInf), b[i].value_or(kInf));
  }
  return s;
}

PairedSeries PairedSeries::swapped() const {
  PairedSeries s;
  for (const auto &[x, y] : pairs) s.pairs.emplace_back(y, x);
  return s;
}

PairedSeries PairedSeries::double_hits() const {
  PairedSeries s;
  for (const auto &p : pairs) {
    if (std::isfinite(p.first) && std::isfinite(p.second)) s.pairs.push_back(p);
  }
  return s;
}

TestResult wilcoxon_pratt(const PairedSeries &series, double alpha) {
  const std::size_t n = series.pairs.size();
  std::vector<double> diff(n), mag(n);
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = difference(series.pairs[i]);
    mag[i] = std::fabs(diff[i]);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return mag[x] < mag[y]; });

  // Average ranks over |d| with zeros included; all infinite magnitudes tie.
  std::vector<double> rank(n);
  double tie_term = 0.0;
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && same_magnitude(mag[order[j + 1]], mag[order[i]])) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    const double t = static_cast<double>(j - i + 1);
    if (mag[order[i]] == 0.0) {
      zeros = j - i + 1;
    } else {
      tie_term += t * t * t - t;
    }
    i = j + 1;
  }
  if (zeros == n) throw NoNonzeroDifferences();

  double t_plus = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (diff[i] > 0) t_plus += rank[i];
  }
  const double nn = static_cast<double>(n), z0 = static_cast<double>(zeros);
  const double mean = (nn * (nn + 1) - z0 * (z0 + 1)) / 4.0;
  const double var = (nn * (nn + 1) * (2 * nn + 1) - z0 * (z0 + 1) * (2 * z0 + 1)) / 24.0 - tie_term / 48.0;
  const double dev = t_plus - mean;
  const double corrected = std::max(0.0, std::fabs(dev) - 0.5);
  const double z = var > 0 ? std::copysign(corrected / std::sqrt(var), dev) : 0.0;

  TestResult r;
  r.n_pairs = static_cast<int>(n);
  r.statistic = z == 0.0 ? 0.0 : z;
  r.p_value = two_sided_normal_p(z);
  r.significant = r.p_value < alpha;
  for (double x : diff) {
    r.wins_a += x < 0;
    r.wins_b += x > 0;
  }
  return r;
}

TestResult proportion_test(const PairedSeries &series, double alpha) {
  TestResult r;
  r.n_pairs = static_cast<int>(series.pairs.size());
  for (const auto &p : series.pairs) {
    const double x = difference(p);
    r.wins_a += x < 0;
    r.wins_b += x > 0;
  }
  const int n = r.wins_a + r.wins_b;
  if (n == 0) throw AllTies();
  const double share = static_cast<double>(r.wins_a) / n;
  const double dev = share - 0.5;
  const double numerator = std::max(0.0, std::fabs(dev) - 1.0 / (2.0 * n));
  const double z = numerator / std::sqrt(0.25 / n);
  r.proportion = share;
  r.statistic = numerator == 0.0 ? 0.0 : std::copysign(z, dev);
  r.p_value = two_sided_normal_p(z);
  r.significant = r.p_value < alpha;
  return r;
}

TestResult magnitude_test(const PairedSeries &series, double alpha) {
  const std::size_t n = series.pairs.size();
  for (const auto &[x, y] : series.pairs) {
    if (!std::isfinite(x) || !std::isfinite(y)) {
      throw std::invalid_argument("magnitude test needs finite values (double hits only)");
    }
  }
  if (n < 2) throw std::invalid_argument("magnitude test needs at least two pairs");

  std::vector<double> d(n);
  double sum_a = 0.0, sum_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [x, y] = series.pairs[i];
    const double m = (x + y) / 2.0;
    const double na = m == 0.0 ? 1.0 : x / m;
    const double nb = m == 0.0 ? 1.0 : y / m;
    sum_a += na;
    sum_b += nb;
    d[i] = na - nb;
  }
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 1e-12 * std::max(1.0, std::fabs(mean)))) throw ZeroVariance();

  TestResult r;
  r.n_pairs = static_cast<int>(n);
  r.statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.statistic))));
  r.significant = r.p_value < alpha;
  r.mean_a = sum_a / static_cast<double>(n);
  r.mean_b = sum_b / static_cast<double>(n);
  for (double x : d) {
    r.wins_a += x < 0;
    r.wins_b += x > 0;
  }
  return r;
}

const char *to_string(Metric metric) {
  switch (metric) {
    case Metric::Quality: return "quality";
    case Metric::TimeOffline: return "time_offline";
    case Metric::TimeOnline: return "time_online";
  }
  return "?";
}

std::optional<Metric> parse_metric(const std::string &text) {
  for (Metric m : {Metric::Quality, Metric::TimeOffline, Metric::TimeOnline}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

std::optional<double> metric_value(const MethodRun &run, Metric metric) {
  if (!run.feasible) return std::nullopt;
  switch (metric) {
    case Metric::Quality: return run.makespan ? std::optional<double>(static_cast<double>(*run.makespan)) : std::nullopt;
    case Metric::TimeOffline: return run.time_offline.count();
    case Metric::TimeOnline: return run.time_online.count();
  }
  return std::nullopt;
}

bool PartialOrdering::is_acyclic() const {
  std::map<std::string, std::vector<std::string>> out;
  std::map<std::string, int> indegree;
  for (const auto &m : methods) indegree[m] = 0;
  for (const auto &e : edges) {
    out[e.better].push_back(e.worse);
    ++indegree[e.worse];
    indegree.try_emplace(e.better, 0);
  }
  std::vector<std::string> ready;
  for (const auto &[m, deg] : indegree) {
    if (deg == 0) ready.push_back(m);
  }
  std::size_t seen = 0;
  while (!ready.empty()) {
    const std::string m = ready.back();
    ready.pop_back();
    ++seen;
    for (const auto &w : out[m]) {
      if (--indegree[w] == 0) ready.push_back(w);
    }
  }
  return seen == indegree.size();
}

bool PartialOrdering::has_edge(const std::string &better, const std::string &worse) const {
  return std::any_of(edges.begin(), edges.end(),
                     [&](const OrderingEdge &e) { return e.better == better && e.worse == worse; });
}

std::string PartialOrdering::to_dot() const {
  std::ostringstream out;
  out << "digraph " << srcpsp::to_string(metric) << " {\n";
  for (const auto &m : methods) out << "  \"" << m << "\";\n";
  for (const auto &e : edges) {
    out << "  \"" << e.better << "\" -> \"" << e.worse << "\" [style="
        << (e.strength == EdgeStrength::Strong ? "solid" : "dashed") << "];\n";
  }
  out << "}\n";
  return out.str();
}

PartialOrdering build_partial_ordering(const std::vector<MethodRun> &runs, Metric metric, double alpha) {
  using Key = std::pair<std::string, int>;
  std::map<std::string, std::map<Key, std::optional<double>>> table;
  for (const auto &run : runs) {
    auto [it, fresh] = table[run.method].try_emplace(Key{run.instance, run.sample}, metric_value(run, metric));
    if (!fresh) {
      throw std::invalid_argument("duplicate run for method '" + run.method + "' on " + run.instance +
                                  " sample " + std::to_string(run.sample));
    }
  }

  PartialOrdering po;
  po.metric = metric;
  for (const auto &[m, rows] : table) po.methods.push_back(m);

  for (std::size_t i = 0; i < po.methods.size(); ++i) {
    for (std::size_t j = i + 1; j < po.methods.size(); ++j) {
      const auto &ra = table[po.methods[i]];
      const auto &rb = table[po.methods[j]];
      std::vector<std::optional<double>> va, vb;
      for (const auto &[key, value] : ra) {
        auto it = rb.find(key);
        if (it == rb.end()) continue;
        va.push_back(value);
        vb.push_back(it->second);
      }
      if (va.empty()) continue;

      PairComparison cmp;
      cmp.method_a = po.methods[i];
      cmp.method_b = po.methods[j];
      const PairedSeries series = PairedSeries::from_optional(va, vb);
      cmp.pairs = static_cast<int>(series.pairs.size());
      try {
        cmp.wilcoxon = wilcoxon_pratt(series, alpha);
      } catch (const std::domain_error &err) {
        cmp.notes.push_back(std::string("wilcoxon: ") + err.what());
      }
      try {
        cmp.proportion = proportion_test(series, alpha);
      } catch (const std::domain_error &err) {
        cmp.notes.push_back(std::string("proportion: ") + err.what());
      }
      try {
        cmp.magnitude = magnitude_test(series.double_hits(), alpha);
      } catch (const std::exception &err) {
        cmp.notes.push_back(std::string("magnitude: ") + err.what());
      }

      auto add = [&](bool a_better, EdgeStrength s) {
        po.edges.push_back(a_better ? OrderingEdge{cmp.method_a, cmp.method_b, s}
                                    : OrderingEdge{cmp.method_b, cmp.method_a, s});
      };
      if (cmp.wilcoxon && cmp.wilcoxon->significant) {
        add(cmp.wilcoxon->statistic < 0, EdgeStrength::Strong);
      } else if (cmp.proportion && cmp.proportion->significant) {
        add(cmp.proportion->statistic > 0, EdgeStrength::Weak);
      }
      po.comparisons.push_back(std::move(cmp));
    }
  }
  return po;
}

}  // namespace srcpsp
