#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace matchlab {

// Sentinel for an unknown/unbounded per-item weight cap. Serialized as null.
inline constexpr double kUnboundedCap = std::numeric_limits<double>::infinity();

// One matching problem: |U| offline items with capacities and weight caps,
// plus an ordered sequence of online arrivals, each revealing one row of
// non-negative edge weights (length |U|). A zero weight doubles as "no edge".
struct ProblemInstance {
  int num_offline = 0;
  std::vector<int> capacities;            // c_u >= 1
  std::vector<double> weight_caps;        // w_{u,max}; kUnboundedCap if unknown
  std::vector<std::vector<double>> arrivals;  // arrivals[v][u] = w_uv

  int num_online() const { return static_cast<int>(arrivals.size()); }

  bool operator==(const ProblemInstance&) const = default;
};

struct GeneratorConfig {
  int num_offline = 0;
  int num_online = 0;
  int capacity_low = 1;       // inclusive
  int capacity_high = 1;      // inclusive
  double weight_low = 0.0;
  double weight_high = 1.0;
  double sparsity = 0.0;      // probability an edge weight is forced to 0
  std::uint64_t seed = 0;
};

// Draw recipe (fixed; golden files depend on it):
//   rng = SplitMix64(seed)
//   c_u = capacity_low + rng.next() % span           for u = 0..|U|-1
//   for each arrival v (outer), each offline u (inner):
//     coin = rng.next_double(); w = rng.uniform(weight_low, weight_high)
//     weight = coin < sparsity ? 0 : w
// The weight draw is consumed even when the coin zeroes the edge, so the
// stream position does not depend on outcomes. weight_caps[u] = weight_high.
ProblemInstance generate_instance(const GeneratorConfig& config);

// Every violation is reported; an empty result means the instance is valid.
std::vector<std::string> validate(const ProblemInstance& instance);

// JSONL: one instance per line with keys num_offline, capacities,
// w_max (null = unbounded), arrivals. Doubles round-trip exactly.
void save_instances(const std::vector<ProblemInstance>& instances, std::ostream& out);
void save_instances(const std::vector<ProblemInstance>& instances, const std::string& path);
std::vector<ProblemInstance> load_instances(std::istream& in);
std::vector<ProblemInstance> load_instances(const std::string& path);

}  // namespace matchlab
