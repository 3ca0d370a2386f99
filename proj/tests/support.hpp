#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "srcpsp/generator.hpp"
#include "srcpsp/stats.hpp"

namespace support {

using namespace srcpsp;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Tiny instances for exhaustive search.
inline GeneratorParams small_params(int n) {
  GeneratorParams p;
  p.activities = n;
  p.resources = 2;
  p.max_duration = 3;
  p.max_demand = 3;
  p.min_capacity = 3;
  p.max_capacity = 4;
  p.arc_density = 0.3;
  p.max_lag_share = 0.4;
  p.max_lag_slack = 2;
  p.demand_density = 0.8;
  return p;
}

inline int oracle_horizon(const ProjectInstance &inst, const std::vector<int> &durations) {
  Time h = 0;
  for (int x : durations) h += x;
  for (const auto &k : inst.constraints) h += std::max<Time>(0, k.weight);
  return static_cast<int>(h);
}

inline PairedSeries from_diffs(const std::vector<double> &diffs) {
  PairedSeries s;
  for (double d : diffs) s.pairs.emplace_back(10.0 + d, 10.0);
  return s;
}

inline PairedSeries wins(int n, int wins_a) {
  PairedSeries s;
  for (int i = 0; i < n; ++i) s.pairs.emplace_back(i < wins_a ? 1.0 : 2.0, i < wins_a ? 2.0 : 1.0);
  return s;
}

inline PairedSeries random_series(std::mt19937_64 &rng, int n, double inf_share) {
  PairedSeries s;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> v(1, 20);
  while (static_cast<int>(s.pairs.size()) < n) {
    double a = v(rng), b = v(rng);
    if (u(rng) < inf_share) a = kInf;
    if (u(rng) < inf_share) b = kInf;
    if (std::isinf(a) && std::isinf(b)) continue;
    s.pairs.emplace_back(a, b);
  }
  return s;
}

struct ProportionCase {
  int n, w;
  double z, p;
};

// A wins w of n non-tie pairs.
inline const std::vector<ProportionCase> kProportionCases{
    {10, 8, 1.58113883008419, 0.11384629800665803},
    {73, 73, 8.426962598121401, 3.5475318431267855e-17},
    {61, 41, 2.560737598657919, 0.01044502138496425},
    {1, 1, 0.0, 1.0},
    {20, 5, -2.0124611797498106, 0.04417134490844264},
    {7, 4, 0.0, 1.0},
    {100, 60, 1.8999999999999995, 0.05743311963200367},
};

struct MagnitudeCase {
  PairedSeries s;
  double t, p, ma, mb;
};

inline const std::vector<MagnitudeCase> kMagnitudeCases{
    {{{{10, 30}, {20, 20}, {15, 25}, {9, 11}, {40, 44}}},
     -1.9847879031759792, 0.11815267909812292, 0.8204761904761904, 1.1795238095238094},
    {{{{5, 6}, {7, 7.5}, {8, 9}, {3, 3.3}, {10, 12}}},
     -5.647096052953146, 0.0048429120215439025, 0.9354512965060632, 1.0645487034939367},
    {{{{100, 90}, {80, 85}, {60, 50}, {70, 71}, {90, 80}, {55, 60}}},
     0.9087644634411753, 0.4051474425622883, 1.020248451585678, 0.9797515484143219},
    {{{{1, 2}, {2, 1}, {3, 5}, {4, 4.5}, {5, 9}}},
     -0.9723032133848766, 0.3859571509542843, 0.88109243697479, 1.11890756302521},
    {{{{12, 10}, {14, 13}, {9, 8}, {20, 15}, {7, 7.5}}},
     2.0086870651467073, 0.11497100127823276, 1.059028808318869, 0.940971191681131},
};

}  // namespace support
