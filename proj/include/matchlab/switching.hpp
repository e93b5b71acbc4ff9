#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "matchlab/experts.hpp"
#include "matchlab/instance.hpp"
#include "matchlab/matching.hpp"

namespace matchlab {

// Robustness knobs: the run must end with R >= rho * R_expert - budget_b.
struct SwitchConfig {
  double rho = 0.0;       // in [0, 1]
  double budget_b = 0.0;  // >= 0
  Setting setting = Setting::kNoFreeDisposal;
};

// Inequalities are evaluated with this slack on the generous side, so a
// borderline-true condition stays true regardless of summation order.
inline constexpr double kRobustnessTol = 1e-9;

// Welford-style accumulator; variance is the population variance.
struct RunningStats {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance() const { return n > 0 ? m2 / static_cast<double>(n) : 0.0; }
};

// Observable state of the actual run, as seen by a proposer before the
// decision for the current arrival: the ledger after v-1 decisions plus
// running statistics over arrivals 1..v-1.
struct RunState {
  const ProblemInstance* instance = nullptr;
  const MatchLedger* actual = nullptr;
  std::vector<RunningStats> weight_history;  // per u, over past arrivals
  std::vector<int> positive_seen;            // per u, # past arrivals with w > 0
  int arrivals_seen = 0;                     // v - 1
  int skips = 0;                             // skip decisions taken so far
};

// Source of the per-arrival proposal. Proposals targeting a full item in
// the no-free-disposal setting are coerced to skip by the runner before
// any condition is evaluated.
class Proposer {
 public:
  virtual ~Proposer() = default;
  virtual Decision propose(const RunState& state, std::span<const double> weight_row,
                           int step) = 0;
};

// Replays a fixed decision sequence; steps past the script skip.
class ScriptedProposer final : public Proposer {
 public:
  explicit ScriptedProposer(std::vector<Decision> script) : script_(std::move(script)) {}
  Decision propose(const RunState&, std::span<const double>, int step) override;

 private:
  std::vector<Decision> script_;
};

// Proposes the lowest-weight available assignment (zero-weight edges
// included), which burns capacity for minimal reward; skips only when
// nothing is available. Used to stress the robustness layer.
class AdversarialProposer final : public Proposer {
 public:
  Decision propose(const RunState& state, std::span<const double> weight_row,
                   int step) override;
};

// Reservation value added to the expert's cumulative reward in the
// no-free-disposal switching condition: for each u, the count by which the
// actual run would exceed the expert after following the proposal, clamped
// at zero, times w_{u,max}. Any positive excess on an unbounded-cap item
// makes the whole hedge +infinity.
//
// Counts are taken as the runner sees them: actual before the current
// decision, expert already advanced for the current arrival.
double hedge_nfd(const MatchLedger& actual, const MatchLedger& expert_shadow,
                 const Decision& proposal, std::span<const double> weight_caps);

// Same reservation with no proposal term; the quantity the per-step audit
// compares against after the decision is committed.
double hedge_nfd_at_rest(const MatchLedger& actual, const MatchLedger& expert_shadow,
                         std::span<const double> weight_caps);

// True iff following the proposal keeps the run robust:
//   R_prev + w_proposed >= rho * (R_expert + hedge) - budget_b  (within tol).
// rho = 0 is always true; an infinite hedge with rho > 0 is always false.
bool condition_nfd(double reward_prev, double w_proposed, double expert_reward,
                   double hedge, const SwitchConfig& cfg);

// Free-disposal reservation: per u, compare the zero-padded increasing
// top sets of the actual run (with the proposed arrival's weight
// tentatively included) and of the expert, take the best prefix-sum
// advantage, clamp at zero, sum.
double hedge_fd(const MatchLedger& actual, const MatchLedger& expert_shadow,
                const Decision& proposal, std::span<const double> weight_row);

// As above with no tentative proposal (both ledgers as they stand).
double hedge_fd_at_rest(const MatchLedger& actual, const MatchLedger& expert_shadow);

// True iff R_prev + delta_f_proposed >= rho * (R_expert + g) - budget_b.
bool condition_fd(double reward_prev, double delta_f_proposed, double expert_reward,
                  double g, const SwitchConfig& cfg);

// One switching decision, expert shadow already advanced for this arrival.
// No free disposal: proposal if the condition passes, else the expert's
// decision if still available in the actual ledger, else skip. Free
// disposal: proposal if the condition passes, else the expert's decision.
Decision lomar_step(const MatchLedger& actual, const MatchLedger& expert_shadow,
                    const Decision& proposal, const Decision& expert_decision,
                    std::span<const double> weight_row,
                    std::span<const double> weight_caps, const SwitchConfig& cfg);

struct StepRecord {
  Decision proposed = Decision::skip();   // RL proposal after feasibility coercion
  Decision expert = Decision::skip();     // expert's decision this arrival
  Decision actual = Decision::skip();     // committed decision
  bool condition = false;                 // switching condition outcome
  double hedge = 0.0;                     // reservation used in the condition
  double gain = 0.0;                      // realized counted gain
  double reward = 0.0;                    // R_v after this step
  double expert_reward = 0.0;             // expert's R^pi_v after this step
  double slack = 0.0;                     // per-step audit LHS - RHS (>= -tol)
};

struct RunTrace {
  std::vector<StepRecord> steps;
  double final_reward = 0.0;
  double final_expert_reward = 0.0;
};

// Runs one full episode: advance the expert on its shadow ledger, ask the
// proposer, switch, commit, and record the per-step robustness slack.
RunTrace run_episode(const ProblemInstance& instance, Proposer& proposer,
                     ExpertKind expert_kind, const SwitchConfig& cfg);

// The expert alone on a fresh ledger; reference rewards for evaluation.
RunTrace run_expert_alone(const ProblemInstance& instance, ExpertKind expert_kind,
                          Setting setting);

// Shared episode plumbing: owns the actual ledger, the expert and its
// shadow, and the running statistics proposers read. Used by run_episode
// and by the training rollouts so both see identical state evolution.
class EpisodeEngine {
 public:
  EpisodeEngine(const ProblemInstance& instance, ExpertKind expert_kind, Setting setting);

  const MatchLedger& actual() const { return actual_; }
  const MatchLedger& shadow() const { return shadow_; }
  const RunState& state() const { return state_; }
  int num_steps() const { return instance_->num_online(); }
  std::span<const double> row(int step) const;  // step is 1-based

  // Decides and applies the expert's move for this arrival on the shadow.
  Decision advance_expert(int step);

  // Coerces an infeasible no-free-disposal proposal to skip.
  Decision sanitize_proposal(const Decision& proposal) const;

  // Commits a decision to the actual ledger and folds the arrival into the
  // running statistics. Returns the realized gain.
  double commit(const Decision& decision, int step);

 private:
  const ProblemInstance* instance_;
  MatchLedger actual_;
  MatchLedger shadow_;
  std::unique_ptr<Expert> expert_;
  RunState state_;
};

}  // namespace matchlab
