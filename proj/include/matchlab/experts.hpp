#pragma once

#include <memory>
#include <span>

#include "matchlab/matching.hpp"

namespace matchlab {

enum class ExpertKind { kGreedy, kOsm };

// Greedy expert. No free disposal: the available item with the highest
// positive weight (ties: smallest index), skip when every available weight
// is 0. Free disposal: the item with the highest marginal counted gain
// (ties: larger raw weight, then smaller index); skips only when all gains
// and all weights are 0.
Decision greedy_decide(const MatchLedger& shadow, std::span<const double> weight_row);

// Sampling-phase length of the secretary-style expert: floor(|V| / e).
int osm_phase_length(int num_online);

struct OsmState {
  double threshold = 0.0;
};

// Secretary-style expert with a single global threshold. During the first
// phase_length arrivals (1-based step <= phase_length) it only observes:
// it skips and raises the threshold to the largest weight seen. Afterwards
// it assigns the available argmax item iff its weight strictly exceeds the
// threshold; the threshold is frozen once the phase ends.
Decision osm_decide(const MatchLedger& shadow, std::span<const double> weight_row,
                    int step, int phase_length, OsmState& state);

// An expert is a deterministic function of its own shadow ledger, the
// current weight row, the 1-based step index, and private state. The
// episode runner owns and advances the shadow ledger; the actual run's
// decisions never feed back into the expert.
class Expert {
 public:
  virtual ~Expert() = default;
  virtual Decision decide(const MatchLedger& shadow, std::span<const double> weight_row,
                          int step) = 0;
};

std::unique_ptr<Expert> make_expert(ExpertKind kind, int num_online);

}  // namespace matchlab
