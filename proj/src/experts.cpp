#include "matchlab/experts.hpp"

#include <cmath>

namespace matchlab {

Decision greedy_decide(const MatchLedger& shadow, std::span<const double> weight_row) {
  const int n = shadow.num_offline();

  if (shadow.setting() == Setting::kNoFreeDisposal) {
    int best = -1;
    double best_w = 0.0;  // strictly positive weight required
    for (int u = 0; u < n; ++u) {
      if (!shadow.available(u)) continue;
      const double w = weight_row[static_cast<std::size_t>(u)];
      if (w > best_w) {
        best_w = w;
        best = u;
      }
    }
    return best < 0 ? Decision::skip() : Decision::assign(best);
  }

  // Free disposal: highest marginal counted gain; ties prefer the larger
  // raw weight, then the smaller index. Skip only when nothing would ever
  // matter: every gain 0 and every weight 0.
  int best = -1;
  double best_gain = -1.0;
  double best_w = -1.0;
  bool any_positive_weight = false;
  for (int u = 0; u < n; ++u) {
    const double w = weight_row[static_cast<std::size_t>(u)];
    if (w > 0.0) any_positive_weight = true;
    const double gain = shadow.peek_gain(Decision::assign(u), weight_row);
    if (gain > best_gain || (gain == best_gain && w > best_w)) {
      best_gain = gain;
      best_w = w;
      best = u;
    }
  }
  if (best_gain <= 0.0 && !any_positive_weight) return Decision::skip();
  return Decision::assign(best);
}

int osm_phase_length(int num_online) {
  return static_cast<int>(std::floor(static_cast<double>(num_online) / std::exp(1.0)));
}

Decision osm_decide(const MatchLedger& shadow, std::span<const double> weight_row,
                    int step, int phase_length, OsmState& state) {
  const int n = shadow.num_offline();
  if (step <= phase_length) {
    for (int u = 0; u < n; ++u) {
      state.threshold = std::max(state.threshold, weight_row[static_cast<std::size_t>(u)]);
    }
    return Decision::skip();
  }
  int best = -1;
  double best_w = -1.0;
  for (int u = 0; u < n; ++u) {
    if (!shadow.available(u)) continue;
    const double w = weight_row[static_cast<std::size_t>(u)];
    if (w > best_w) {
      best_w = w;
      best = u;
    }
  }
  if (best >= 0 && best_w > state.threshold) return Decision::assign(best);
  return Decision::skip();
}

namespace {

class GreedyExpert final : public Expert {
 public:
  Decision decide(const MatchLedger& shadow, std::span<const double> weight_row,
                  int /*step*/) override {
    return greedy_decide(shadow, weight_row);
  }
};

class OsmExpert final : public Expert {
 public:
  explicit OsmExpert(int num_online) : phase_length_(osm_phase_length(num_online)) {}

  Decision decide(const MatchLedger& shadow, std::span<const double> weight_row,
                  int step) override {
    return osm_decide(shadow, weight_row, step, phase_length_, state_);
  }

 private:
  int phase_length_;
  OsmState state_;
};

}  // namespace

std::unique_ptr<Expert> make_expert(ExpertKind kind, int num_online) {
  switch (kind) {
    case ExpertKind::kGreedy:
      return std::make_unique<GreedyExpert>();
    case ExpertKind::kOsm:
      return std::make_unique<OsmExpert>(num_online);
  }
  return nullptr;
}

}  // namespace matchlab
