#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "matchlab/rng.hpp"
#include "matchlab/switching.hpp"

namespace matchlab {

// Feature layout for one (offline item, arrival) pair. History features are
// computed over arrivals 1..v-1 of the actual run; empty-set statistics are
// 0; variances are population variances; fractions live in [0, 1].
//   0  w_uv of the current row
//   1  remaining-capacity fraction of u, clamped to [0, 1]
//   2  running mean of u's weights over past arrivals
//   3  running variance of u's weights over past arrivals
//   4  fraction of past arrivals with w_uv' > 0 (degree proxy)
//   5  normalized step v / |V|
//   6  fraction of offline items with positive weight in the current row
//   7  max of weights matched to u so far
//   8  min of weights matched to u so far
//   9  mean of weights matched to u so far
//   10 variance of weights matched to u so far
//   11 fraction of offline items at capacity
//   12 skip ratio over past decisions
//   13 cumulative reward / |U|
inline constexpr int kFeatureDim = 14;

// Tag serialized with every policy; loading rejects a mismatch so a policy
// is never scored against features it was not trained on.
inline constexpr const char* kFeatureSpecVersion = "matchlab.features.v1";

using FeatureVector = std::array<double, kFeatureDim>;

FeatureVector extract_features(const RunState& state, int u, int step,
                               std::span<const double> weight_row);

// Fully connected scoring network, shared across all offline items.
struct PolicyParams {
  std::vector<int> dims;                         // e.g. {14, 100, 100, 100, 1}
  std::vector<std::vector<double>> weights;      // per layer, row-major out x in
  std::vector<std::vector<double>> biases;       // per layer
  std::string activation = "relu";
  std::string feature_spec_version = kFeatureSpecVersion;

  int parameter_count() const;
};

inline const std::vector<int> kDefaultPolicyDims = {kFeatureDim, 100, 100, 100, 1};

// Uniform(-a, a) per layer with a = sqrt(6 / (fan_in + fan_out)).
PolicyParams init_policy(std::span<const int> dims, std::uint64_t seed);

std::vector<double> flatten(const PolicyParams& params);
void assign_flat(PolicyParams& params, std::span<const double> flat);

// Scalar network output. Throws NumericError naming the first layer that
// produces a non-finite value.
double policy_forward(const PolicyParams& params, std::span<const double> input);

// s_u = w_uv - h(features_u) for every offline item.
std::vector<double> score_items(const PolicyParams& params,
                                const std::vector<FeatureVector>& features,
                                std::span<const double> weight_row);

// argmax over available scores and the implicit skip score 0. Ties prefer
// skip, then the smallest index.
Decision rl_decide(std::span<const double> scores, const std::vector<bool>& available);

// Signed slack of the active setting's switching condition for a proposal:
// positive iff following it keeps the run robust, zero exactly on the
// boundary. -infinity when an unbounded-cap hedge fires with rho > 0.
double reward_difference(const MatchLedger& actual, const MatchLedger& expert_shadow,
                         const Decision& proposal, std::span<const double> weight_row,
                         std::span<const double> weight_caps, const SwitchConfig& cfg);

// Probability of following the RL proposal: sigmoid(r_diff / temperature),
// computed in the overflow-safe form. Strictly increasing in r_diff.
double p_os(double r_diff, double temperature);

// Distribution over U ∪ {skip}; index num_offline is skip. Unavailable
// items carry probability 0.
struct ActionDistribution {
  std::vector<double> probs;

  int num_offline() const { return static_cast<int>(probs.size()) - 1; }
  double prob(const Decision& d) const {
    return d.is_skip() ? probs.back() : probs[static_cast<std::size_t>(d.index())];
  }
};

// Softmax over the scores of available items plus the skip score 0.
ActionDistribution rl_action_probs(std::span<const double> scores,
                                   const std::vector<bool>& available);

// p_follow_rl * rl + (1 - p_follow_rl) * onehot(expert_target). The caller
// passes skip as the target when the expert's item is unavailable.
ActionDistribution mixture_prob(const ActionDistribution& rl, double p_follow_rl,
                                const Decision& expert_target);

struct TrainConfig {
  int epochs = 0;
  int batch_size = 1;          // trajectories per epoch
  double learning_rate = 1e-3;
  double rho = 0.0;
  double budget_b = 0.0;
  Setting setting = Setting::kNoFreeDisposal;
  ExpertKind expert = ExpertKind::kGreedy;
  double temperature_start = 1.0;
  double temperature_decay = 0.99;  // per epoch
  double temperature_floor = 0.05;
  bool use_baseline = false;        // subtract the batch-mean reward
  std::uint64_t seed = 0;
  std::vector<int> dims = kDefaultPolicyDims;
};

// One sampled training episode. Decisions are recorded; everything else
// (features, scores, mixtures) is recomputed from them at a given
// parameter vector, so the gradient and its finite-difference check share
// one forward definition.
struct Trajectory {
  ProblemInstance instance;
  ExpertKind expert_kind = ExpertKind::kGreedy;
  SwitchConfig cfg;
  double temperature = 1.0;
  std::vector<Decision> expert_decisions;
  std::vector<Decision> sampled_decisions;
  double total_reward = 0.0;
};

// Algorithm: advance the expert, score, form the switching-aware mixture,
// sample the actual decision, commit it. Fully deterministic given rng.
Trajectory rollout_sampled(const ProblemInstance& instance, const PolicyParams& params,
                           ExpertKind expert_kind, const SwitchConfig& cfg,
                           double temperature, SplitMix64& rng);

// Sum over steps of log p(sampled decision) under the recorded trajectory,
// replayed at the given parameters.
double trajectory_log_prob(const PolicyParams& params, const Trajectory& traj);

// REINFORCE gradient of one trajectory, flattened to the parameter layout:
// (sum of per-step grad log p) * (total reward - baseline).
std::vector<double> log_prob_gradient(const PolicyParams& params, const Trajectory& traj,
                                      double baseline = 0.0);

// Policy-gradient training: per epoch, sample batch_size instances, roll
// out one trajectory each, average the per-trajectory gradients, ascend,
// then decay the temperature. Deterministic given the seed.
PolicyParams train(std::span<const ProblemInstance> train_instances,
                   const TrainConfig& cfg);

void save_policy(const PolicyParams& params, const std::string& path);
PolicyParams load_policy(const std::string& path);

// Proposer backed by a scoring policy; what the evaluation harness runs.
class PolicyProposer final : public Proposer {
 public:
  explicit PolicyProposer(const PolicyParams& params) : params_(&params) {}
  Decision propose(const RunState& state, std::span<const double> weight_row,
                   int step) override;

 private:
  const PolicyParams* params_;
};

}  // namespace matchlab
