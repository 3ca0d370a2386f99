#include "srcpsp/instance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace srcpsp {

namespace {

struct Line {
  int number = 0;
  std::vector<std::string> tokens;
};

std::vector<Line> tokenize(std::istream &in) {
  std::vector<Line> lines;
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    auto first = raw.find_first_not_of(" \t\r");
    if (first == std::string::npos || raw[first] == '#') continue;
    Line line{number, {}};
    std::istringstream ss(raw);
    std::string tok;
    while (ss >> tok) line.tokens.push_back(tok);
    lines.push_back(std::move(line));
  }
  return lines;
}

const char *kind_name(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::MalformedHeader: return "malformed header";
    case ParseErrorKind::SuccessorMismatch: return "successor/weight count mismatch";
    case ParseErrorKind::DemandExceedsCapacity: return "demand exceeds capacity";
    case ParseErrorKind::NonIntegerToken: return "non-integer token";
    case ParseErrorKind::UnexpectedEnd: return "unexpected end of input";
    case ParseErrorKind::BadActivityId: return "bad activity id";
    case ParseErrorKind::WrongTokenCount: return "wrong token count";
    case ParseErrorKind::InvalidDummy: return "invalid dummy activity";
  }
  return "parse error";
}

// Accepts "12", "-3" and the bracketed lag form "[-3]".
bool to_int(std::string_view tok, long long &out, bool allow_brackets) {
  if (allow_brackets && tok.size() >= 2 && tok.front() == '[' && tok.back() == ']') {
    tok = tok.substr(1, tok.size() - 2);
  }
  if (tok.empty()) return false;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

class Reader {
public:
  explicit Reader(std::vector<Line> lines) : lines_(std::move(lines)) {}

  const Line &next(const char *what) {
    if (pos_ >= lines_.size()) {
      int last = lines_.empty() ? 0 : lines_.back().number;
      throw ParseError(ParseErrorKind::UnexpectedEnd, last, std::string("expected ") + what);
    }
    return lines_[pos_++];
  }

  static long long integer(const Line &line, std::size_t i, bool brackets = false) {
    long long v = 0;
    if (!to_int(line.tokens[i], v, brackets)) {
      throw ParseError(ParseErrorKind::NonIntegerToken, line.number,
                       "token '" + line.tokens[i] + "'");
    }
    return v;
  }

private:
  std::vector<Line> lines_;
  std::size_t pos_ = 0;
};

}  // namespace

ParseError::ParseError(ParseErrorKind kind, int line, const std::string &what)
    : std::runtime_error("line " + std::to_string(line) + ": " + kind_name(kind) + ": " + what),
      kind_(kind),
      line_(line) {}

void ProjectInstance::validate() const {
  const int n = node_count();
  if (activity_count < 0) throw std::invalid_argument("negative activity count");
  if (static_cast<int>(durations.size()) != n) throw std::invalid_argument("durations size");
  if (demands.size() != capacities.size()) throw std::invalid_argument("demands/capacities size");
  for (int d : durations) {
    if (d < 0) throw std::invalid_argument("negative duration");
  }
  if (durations[source()] != 0 || durations[sink()] != 0) {
    throw std::invalid_argument("dummy activities must have zero duration");
  }
  for (std::size_t r = 0; r < capacities.size(); ++r) {
    if (static_cast<int>(demands[r].size()) != n) throw std::invalid_argument("demand row size");
    if (capacities[r] < 1) throw std::invalid_argument("capacity must be >= 1");
    if (demands[r][source()] != 0 || demands[r][sink()] != 0) {
      throw std::invalid_argument("dummy activities must have zero demand");
    }
    for (int j = 0; j < n; ++j) {
      if (demands[r][j] < 0 || demands[r][j] > capacities[r]) {
        throw std::invalid_argument("demand out of [0, capacity]");
      }
    }
  }
  for (const auto &c : constraints) {
    if (c.from < 0 || c.from >= n || c.to < 0 || c.to >= n) {
      throw std::invalid_argument("constraint endpoint out of range");
    }
  }
}

ProjectInstance parse_psplib(std::istream &in) {
  Reader reader(tokenize(in));
  ProjectInstance inst;

  const Line &header = reader.next("header");
  long long n = 0, resources = 0;
  if (header.tokens.size() < 2 || header.tokens.size() > 4 ||
      !to_int(header.tokens[0], n, false) || !to_int(header.tokens[1], resources, false) ||
      n < 0 || resources < 0) {
    throw ParseError(ParseErrorKind::MalformedHeader, header.number,
                     "expected 'n R [a b]' with non-negative integers");
  }
  inst.activity_count = static_cast<int>(n);
  const int nodes = inst.node_count();
  const int nres = static_cast<int>(resources);

  auto check_id = [&](const Line &line, long long id, long long expected) {
    if (id != expected) {
      throw ParseError(ParseErrorKind::BadActivityId, line.number,
                       "expected activity " + std::to_string(expected) + ", got " +
                           std::to_string(id));
    }
  };

  for (int j = 0; j < nodes; ++j) {
    const Line &line = reader.next("precedence line");
    if (line.tokens.size() < 3) {
      throw ParseError(ParseErrorKind::SuccessorMismatch, line.number,
                       "expected 'id mode #succ ...'");
    }
    check_id(line, Reader::integer(line, 0), j);
    Reader::integer(line, 1);
    long long nsucc = Reader::integer(line, 2);
    if (nsucc < 0 || line.tokens.size() != static_cast<std::size_t>(3 + 2 * nsucc)) {
      throw ParseError(ParseErrorKind::SuccessorMismatch, line.number,
                       std::to_string(nsucc) + " successors declared, " +
                           std::to_string(line.tokens.size() - 3) + " tokens follow");
    }
    for (long long k = 0; k < nsucc; ++k) {
      long long succ = Reader::integer(line, 3 + k);
      long long weight = Reader::integer(line, 3 + nsucc + k, true);
      if (succ < 0 || succ >= nodes) {
        throw ParseError(ParseErrorKind::BadActivityId, line.number,
                         "successor " + std::to_string(succ) + " out of range");
      }
      inst.constraints.push_back({j, static_cast<int>(succ), weight});
    }
  }

  inst.durations.assign(nodes, 0);
  inst.demands.assign(nres, std::vector<int>(nodes, 0));
  std::vector<int> requirement_line(nodes, 0);
  for (int j = 0; j < nodes; ++j) {
    const Line &line = reader.next("requirement line");
    if (line.tokens.size() != static_cast<std::size_t>(3 + nres)) {
      throw ParseError(ParseErrorKind::WrongTokenCount, line.number,
                       "expected 'id mode duration' plus " + std::to_string(nres) + " demands");
    }
    check_id(line, Reader::integer(line, 0), j);
    Reader::integer(line, 1);
    long long d = Reader::integer(line, 2);
    if (d < 0) throw ParseError(ParseErrorKind::WrongTokenCount, line.number, "negative duration");
    inst.durations[j] = static_cast<int>(d);
    for (int r = 0; r < nres; ++r) {
      long long q = Reader::integer(line, 3 + r);
      if (q < 0) throw ParseError(ParseErrorKind::WrongTokenCount, line.number, "negative demand");
      inst.demands[r][j] = static_cast<int>(q);
    }
    requirement_line[j] = line.number;
    if (inst.is_dummy(j)) {
      bool zero = d == 0;
      for (int r = 0; r < nres; ++r) zero = zero && inst.demands[r][j] == 0;
      if (!zero) {
        throw ParseError(ParseErrorKind::InvalidDummy, line.number,
                         "source/sink must have zero duration and demand");
      }
    }
  }

  if (nres == 0) return inst;
  const Line &caps = reader.next("capacity line");
  if (caps.tokens.size() != static_cast<std::size_t>(nres)) {
    throw ParseError(ParseErrorKind::WrongTokenCount, caps.number,
                     "expected " + std::to_string(nres) + " capacities");
  }
  for (int r = 0; r < nres; ++r) {
    long long c = Reader::integer(caps, r);
    if (c < 1) throw ParseError(ParseErrorKind::WrongTokenCount, caps.number, "capacity < 1");
    inst.capacities.push_back(static_cast<int>(c));
  }
  for (int r = 0; r < nres; ++r) {
    for (int j = 0; j < nodes; ++j) {
      if (inst.demands[r][j] > inst.capacities[r]) {
        throw ParseError(ParseErrorKind::DemandExceedsCapacity, requirement_line[j],
                         "activity " + std::to_string(j) + " demands " +
                             std::to_string(inst.demands[r][j]) + " of resource " +
                             std::to_string(r) + " (capacity " +
                             std::to_string(inst.capacities[r]) + ")");
      }
    }
  }
  return inst;
}

ProjectInstance parse_psplib(const std::string &text) {
  std::istringstream in(text);
  return parse_psplib(in);
}

ProjectInstance load_psplib(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file '" + path + "'");
  ProjectInstance inst = parse_psplib(in);
  auto slash = path.find_last_of('/');
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = base.find_last_of('.');
  inst.name = dot == std::string::npos ? base : base.substr(0, dot);
  return inst;
}

std::string serialize_psplib(const ProjectInstance &inst) {
  std::ostringstream out;
  const int nodes = inst.node_count();
  out << inst.activity_count << '\t' << inst.resource_count() << "\t0\t0\n";
  std::vector<std::vector<TemporalConstraint>> by_from(nodes);
  for (const auto &c : inst.constraints) by_from[c.from].push_back(c);
  for (int j = 0; j < nodes; ++j) {
    out << j << "\t1\t" << by_from[j].size();
    for (const auto &c : by_from[j]) out << '\t' << c.to;
    for (const auto &c : by_from[j]) out << "\t[" << c.weight << ']';
    out << '\n';
  }
  for (int j = 0; j < nodes; ++j) {
    out << j << "\t1\t" << inst.durations[j];
    for (int r = 0; r < inst.resource_count(); ++r) out << '\t' << inst.demands[r][j];
    out << '\n';
  }
  for (int r = 0; r < inst.resource_count(); ++r) {
    out << (r ? "\t" : "") << inst.capacities[r];
  }
  out << '\n';
  return out.str();
}

int round_half_away(double x) {
  return static_cast<int>(x < 0 ? -std::floor(-x + 0.5) : std::floor(x + 0.5));
}

StochasticInstance make_stochastic(const ProjectInstance &inst, double epsilon) {
  if (epsilon < 0) throw std::invalid_argument("epsilon must be >= 0");
  StochasticInstance stoch;
  stoch.base = inst;
  stoch.epsilon = epsilon;
  stoch.bounds.resize(inst.node_count());
  for (int j = 0; j < inst.node_count(); ++j) {
    if (inst.is_dummy(j)) continue;
    const double d = inst.durations[j];
    const double spread = epsilon * std::sqrt(d);
    int lb = std::max(1, round_half_away(d - spread));
    int ub = std::max(lb, round_half_away(d + spread));
    stoch.bounds[j] = {lb, ub};
  }
  return stoch;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key) {
  auto splitmix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return splitmix(seed ^ splitmix(key + 0x632be59bd9b4e019ULL));
}

DurationSample sample_durations(const StochasticInstance &stoch, std::uint64_t seed) {
  DurationSample sample;
  sample.seed = seed;
  sample.durations.resize(stoch.bounds.size());
  for (std::size_t j = 0; j < stoch.bounds.size(); ++j) {
    const auto [lb, ub] = stoch.bounds[j];
    const std::uint64_t span = static_cast<std::uint64_t>(ub - lb) + 1;
    // Rejection sampling keeps the draw exactly uniform and platform independent.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t state = mix_seed(seed, j);
    std::uint64_t x = state;
    while (x >= limit) {
      state = mix_seed(state, j);
      x = state;
    }
    sample.durations[j] = lb + static_cast<int>(x % span);
  }
  return sample;
}

DurationSample quantile_durations(const StochasticInstance &stoch, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in [0, 1]");
  DurationSample sample;
  sample.durations.resize(stoch.bounds.size());
  for (std::size_t j = 0; j < stoch.bounds.size(); ++j) {
    const auto [lb, ub] = stoch.bounds[j];
    const int count = ub - lb + 1;
    // smallest k >= 1 with k / count >= gamma
    int k = static_cast<int>(std::ceil(gamma * count - 1e-9));
    k = std::clamp(k, 1, count);
    sample.durations[j] = lb + k - 1;
  }
  return sample;
}

}  // namespace srcpsp
