#pragma once

#include <vector>

#include "matchlab/instance.hpp"
#include "matchlab/matching.hpp"

namespace matchlab {

struct OptResult {
  double value = 0.0;
  std::vector<Decision> assignment;  // one per online item
};

// Exact offline optimum by depth-first enumeration over per-arrival choices
// with capacity pruning and a best-bound cut. Throws SizeError unless
// (|U|+1)^|V| <= 1e7.
OptResult opt_exhaustive(const ProblemInstance& instance);

// Exact offline optimum as a maximum-weight flow, solved by successive
// shortest augmenting paths on reduced costs; augments while the shortest
// path has negative cost.
OptResult opt_flow(const ProblemInstance& instance);

}  // namespace matchlab
