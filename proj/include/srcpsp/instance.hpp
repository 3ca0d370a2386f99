#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace srcpsp {

using Time = std::int64_t;

/// Start-to-start constraint: s[to] - s[from] >= weight.
/// A negative weight on a back arc encodes a maximal time lag.
struct TemporalConstraint {
  int from = 0;
  int to = 0;
  Time weight = 0;

  friend bool operator==(const TemporalConstraint &, const TemporalConstraint &) = default;
};

/// Deterministic RCPSP/max instance.
///
/// Activities are numbered 0..n+1; 0 is the dummy source and n+1 the dummy
/// sink. Both dummies have zero duration and zero demand.
struct ProjectInstance {
  std::string name;
  int activity_count = 0;                    // n, real activities only
  std::vector<int> durations;                // size n+2
  std::vector<std::vector<int>> demands;     // [resource][activity]
  std::vector<int> capacities;               // size R
  std::vector<TemporalConstraint> constraints;

  int node_count() const { return activity_count + 2; }
  int source() const { return 0; }
  int sink() const { return activity_count + 1; }
  int resource_count() const { return static_cast<int>(capacities.size()); }
  bool is_dummy(int j) const { return j == source() || j == sink(); }

  /// Throws std::invalid_argument if any structural invariant is broken.
  void validate() const;

  friend bool operator==(const ProjectInstance &a, const ProjectInstance &b) {
    return a.activity_count == b.activity_count && a.durations == b.durations &&
           a.demands == b.demands && a.capacities == b.capacities &&
           a.constraints == b.constraints;
  }
};

struct DurationBounds {
  int lb = 0;
  int ub = 0;
  friend bool operator==(const DurationBounds &, const DurationBounds &) = default;
};

/// A ProjectInstance whose real activity durations are DiscreteUniform(lb, ub).
struct StochasticInstance {
  ProjectInstance base;
  std::vector<DurationBounds> bounds;  // size n+2, dummies are (0, 0)
  double epsilon = 0.0;

  bool is_deterministic(int j) const { return bounds[j].lb == bounds[j].ub; }
};

/// One scenario: a realized duration per activity.
struct DurationSample {
  std::vector<int> durations;
  std::uint64_t seed = 0;
};

enum class ParseErrorKind {
  MalformedHeader,
  SuccessorMismatch,
  DemandExceedsCapacity,
  NonIntegerToken,
  UnexpectedEnd,
  BadActivityId,
  WrongTokenCount,
  InvalidDummy,
};

class ParseError : public std::runtime_error {
public:
  ParseError(ParseErrorKind kind, int line, const std::string &what);

  ParseErrorKind kind() const { return kind_; }
  int line() const { return line_; }

private:
  ParseErrorKind kind_;
  int line_;
};

/// Reads the PSPLIB RCPSP/max ".sch" layout. Blank lines and lines whose
/// first non-space character is '#' are skipped.
ProjectInstance parse_psplib(std::istream &in);
ProjectInstance parse_psplib(const std::string &text);
ProjectInstance load_psplib(const std::string &path);

/// Canonical ".sch" writer; parse_psplib(serialize_psplib(x)) == x.
std::string serialize_psplib(const ProjectInstance &inst);

/// Half-away-from-zero rounding used by the noise rule.
int round_half_away(double x);

/// lb = max(1, round(d - eps*sqrt(d))), ub = round(d + eps*sqrt(d)).
StochasticInstance make_stochastic(const ProjectInstance &inst, double epsilon);

DurationSample sample_durations(const StochasticInstance &stoch, std::uint64_t seed);

/// Per activity, the smallest v in [lb, ub] whose discrete-uniform CDF reaches gamma.
DurationSample quantile_durations(const StochasticInstance &stoch, double gamma);

/// Deterministic 64-bit mixing of a seed with an extra key.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key);

}  // namespace srcpsp
