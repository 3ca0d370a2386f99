#pragma once

#include <string>
#include <vector>

#include "srcpsp/instance.hpp"

namespace fixture {

// Five activities a..e sharing one resource of capacity 4.
inline const char *kExampleSch = R"(5	1	0	0
0	1	2	1	4	[0]	[0]
1	1	1	2	[2]
2	1	1	3	[1]
3	1	2	1	6	[-6]	[3]
4	1	1	5	[3]
5	1	2	4	6	[-3]	[2]
6	1	0
0	1	0	0
1	1	2	3
2	1	5	2
3	1	3	1
4	1	1	2
5	1	2	2
6	1	0	0
4
)";

enum Act { src = 0, a = 1, b = 2, c = 3, d = 4, e = 5, snk = 6 };

inline srcpsp::ProjectInstance example() { return srcpsp::parse_psplib(std::string(kExampleSch)); }

// Stochastic version used in the STNU walkthrough: only d is uncertain, in [1, 2].
inline srcpsp::StochasticInstance example_stnu() {
  srcpsp::StochasticInstance stoch = srcpsp::make_stochastic(example(), 0.0);
  stoch.bounds[d] = {1, 2};
  return stoch;
}

}  // namespace fixture
