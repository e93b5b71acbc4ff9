#pragma once

#include <span>
#include <vector>

namespace matchlab {

enum class Setting {
  kNoFreeDisposal,  // hard capacities, every matched weight counts
  kFreeDisposal,    // unlimited matches, only the top c_u weights count
};

// Per-arrival action: skip, or assign to one offline item.
class Decision {
 public:
  static Decision skip() { return Decision(-1); }
  static Decision assign(int u) { return Decision(u); }

  bool is_skip() const { return u_ < 0; }
  int index() const { return u_; }

  bool operator==(const Decision&) const = default;

 private:
  explicit Decision(int u) : u_(u) {}
  int u_;
};

// The c_u largest weights of a multiset, sorted increasing and zero-padded
// to length exactly c_u. Ties keep the earliest-matched weight.
std::vector<double> top_set(std::span<const double> multiset, int capacity);

// Counted reward of one offline item under free disposal: sum of the top
// capacity weights. Equals the brute-force best subset of size <= capacity.
double f_value(std::span<const double> multiset, int capacity);

// Marginal counted reward of adding w to the multiset. Always in [0, w].
double delta_f(std::span<const double> multiset, int capacity, double w);

// Matching state for one run: per-item matched weight multisets and the
// cumulative reward, maintained incrementally under either setting.
class MatchLedger {
 public:
  MatchLedger(Setting setting, std::vector<int> capacities);

  Setting setting() const { return setting_; }
  int num_offline() const { return static_cast<int>(capacities_.size()); }
  int capacity(int u) const { return capacities_[u]; }
  const std::vector<int>& capacities() const { return capacities_; }

  int count(int u) const { return static_cast<int>(matched_[u].size()); }
  const std::vector<double>& matched(int u) const { return matched_[u]; }
  double reward() const { return reward_; }

  // No free disposal: remaining capacity. Free disposal: always true.
  bool available(int u) const;

  // Counted gain of a decision without mutating the ledger
  // (w_uv when capacity counts, delta_f under free disposal).
  double peek_gain(const Decision& decision, std::span<const double> weight_row) const;

  // Applies a decision and returns the realized gain. Throws CapacityError
  // on a no-free-disposal assignment to a full item.
  double apply(const Decision& decision, std::span<const double> weight_row);

  // From-scratch reward, used by audits against the incremental value.
  double recompute_reward() const;

 private:
  Setting setting_;
  std::vector<int> capacities_;
  std::vector<std::vector<double>> matched_;
  double reward_ = 0.0;
};

}  // namespace matchlab
