#include "matchlab/matching.hpp"

#include <algorithm>
#include <numeric>

#include "matchlab/errors.hpp"

namespace matchlab {

std::vector<double> top_set(std::span<const double> multiset, int capacity) {
  // Stable sort on descending weight keeps the earliest-matched item on ties.
  std::vector<std::size_t> order(multiset.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return multiset[a] > multiset[b];
  });

  const int kept = std::min<int>(capacity, static_cast<int>(multiset.size()));
  std::vector<double> result(static_cast<std::size_t>(capacity), 0.0);
  for (int i = 0; i < kept; ++i) {
    // Largest kept weight goes last; pad positions stay 0 at the front.
    result[static_cast<std::size_t>(capacity - 1 - i)] = multiset[order[i]];
  }
  return result;
}

double f_value(std::span<const double> multiset, int capacity) {
  const auto top = top_set(multiset, capacity);
  return std::accumulate(top.begin(), top.end(), 0.0);
}

double delta_f(std::span<const double> multiset, int capacity, double w) {
  std::vector<double> grown(multiset.begin(), multiset.end());
  grown.push_back(w);
  return f_value(grown, capacity) - f_value(multiset, capacity);
}

MatchLedger::MatchLedger(Setting setting, std::vector<int> capacities)
    : setting_(setting),
      capacities_(std::move(capacities)),
      matched_(capacities_.size()) {}

bool MatchLedger::available(int u) const {
  if (setting_ == Setting::kFreeDisposal) return true;
  return count(u) < capacities_[u];
}

double MatchLedger::peek_gain(const Decision& decision,
                              std::span<const double> weight_row) const {
  if (decision.is_skip()) return 0.0;
  const int u = decision.index();
  const double w = weight_row[static_cast<std::size_t>(u)];
  if (setting_ == Setting::kNoFreeDisposal) return w;
  return delta_f(matched_[static_cast<std::size_t>(u)], capacities_[u], w);
}

double MatchLedger::apply(const Decision& decision, std::span<const double> weight_row) {
  if (decision.is_skip()) return 0.0;
  const int u = decision.index();
  if (setting_ == Setting::kNoFreeDisposal && !available(u)) {
    throw CapacityError("assignment to full offline item " + std::to_string(u));
  }
  const double gain = peek_gain(decision, weight_row);
  matched_[static_cast<std::size_t>(u)].push_back(weight_row[static_cast<std::size_t>(u)]);
  reward_ += gain;
  return gain;
}

double MatchLedger::recompute_reward() const {
  double total = 0.0;
  for (std::size_t u = 0; u < matched_.size(); ++u) {
    if (setting_ == Setting::kNoFreeDisposal) {
      total += std::accumulate(matched_[u].begin(), matched_[u].end(), 0.0);
    } else {
      total += f_value(matched_[u], capacities_[u]);
    }
  }
  return total;
}

}  // namespace matchlab
