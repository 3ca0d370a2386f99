#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "srcpsp/methods.hpp"

namespace srcpsp {

/// Matched observations of one metric for methods A and B; smaller is
/// better and +infinity marks a failed run.
struct PairedSeries {
  std::vector<std::pair<double, double>> pairs;

  /// nullopt becomes +infinity; pairs where both sides failed are dropped.
  static PairedSeries from_optional(const std::vector<std::optional<double>> &a,
                                    const std::vector<std::optional<double>> &b);
  PairedSeries swapped() const;
  /// Pairs where both values are finite.
  PairedSeries double_hits() const;
};

struct TestResult {
  int n_pairs = 0;
  /// Wilcoxon: signed z of the rank sum of positive differences (negative
  /// favours A). Proportion: signed Z (positive favours A). Magnitude: t of
  /// mean_a - mean_b.
  double statistic = 0.0;
  double p_value = 1.0;
  bool significant = false;

  std::optional<double> proportion;  // share of non-tie pairs won by A
  int wins_a = 0;
  int wins_b = 0;
  std::optional<double> mean_a;  // pair-mean normalized means
  std::optional<double> mean_b;
};

class NoNonzeroDifferences : public std::domain_error {
public:
  NoNonzeroDifferences() : std::domain_error("all paired differences are zero") {}
};

class AllTies : public std::domain_error {
public:
  AllTies() : std::domain_error("every pair is a tie") {}
};

class ZeroVariance : public std::domain_error {
public:
  ZeroVariance() : std::domain_error("normalized differences have zero variance") {}
};

/// Wilcoxon matched-pairs signed-rank test with Pratt's zero handling, tie
/// correction and a 0.5 continuity correction; two-sided normal p.
TestResult wilcoxon_pratt(const PairedSeries &series, double alpha = 0.05);

/// Share of wins of A among non-tie pairs against 1/2, with the 1/(2n)
/// continuity correction.
TestResult proportion_test(const PairedSeries &series, double alpha = 0.05);

/// Paired t-test on values divided by their pair mean. Needs finite values
/// (std::invalid_argument otherwise) and at least two pairs.
TestResult magnitude_test(const PairedSeries &series, double alpha = 0.05);

enum class Metric { Quality, TimeOffline, TimeOnline };

const char *to_string(Metric metric);
std::optional<Metric> parse_metric(const std::string &text);

/// The metric value of a run, nullopt when the run failed.
std::optional<double> metric_value(const MethodRun &run, Metric metric);

enum class EdgeStrength { Strong, Weak };

struct OrderingEdge {
  std::string better;
  std::string worse;
  EdgeStrength strength = EdgeStrength::Strong;
};

struct PairComparison {
  std::string method_a;
  std::string method_b;
  int pairs = 0;
  std::optional<TestResult> wilcoxon;
  std::optional<TestResult> proportion;
  std::optional<TestResult> magnitude;
  std::vector<std::string> notes;
};

struct PartialOrdering {
  Metric metric = Metric::Quality;
  std::vector<std::string> methods;
  std::vector<OrderingEdge> edges;
  std::vector<PairComparison> comparisons;

  bool is_acyclic() const;
  bool has_edge(const std::string &better, const std::string &worse) const;
  /// Solid arrows for strong edges, dashed for weak ones.
  std::string to_dot() const;
};

/// Runs are matched on (instance, sample); every method pair sharing at least
/// one key is compared.
PartialOrdering build_partial_ordering(const std::vector<MethodRun> &runs, Metric metric,
                                       double alpha = 0.05);

}  // namespace srcpsp
