#include "matchlab/switching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "matchlab/errors.hpp"

namespace matchlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Decision ScriptedProposer::propose(const RunState&, std::span<const double>, int step) {
  const std::size_t i = static_cast<std::size_t>(step - 1);
  return i < script_.size() ? script_[i] : Decision::skip();
}

Decision AdversarialProposer::propose(const RunState& state,
                                      std::span<const double> weight_row, int /*step*/) {
  const MatchLedger& actual = *state.actual;
  int worst = -1;
  double worst_w = kInf;
  for (int u = 0; u < actual.num_offline(); ++u) {
    if (!actual.available(u)) continue;
    const double w = weight_row[static_cast<std::size_t>(u)];
    if (w < worst_w) {
      worst_w = w;
      worst = u;
    }
  }
  return worst < 0 ? Decision::skip() : Decision::assign(worst);
}

double hedge_nfd(const MatchLedger& actual, const MatchLedger& expert_shadow,
                 const Decision& proposal, std::span<const double> weight_caps) {
  double total = 0.0;
  for (int u = 0; u < actual.num_offline(); ++u) {
    int excess = actual.count(u) - expert_shadow.count(u);
    if (!proposal.is_skip() && proposal.index() == u) ++excess;
    if (excess <= 0) continue;
    const double cap = weight_caps[static_cast<std::size_t>(u)];
    if (std::isinf(cap)) return kInf;
    total += static_cast<double>(excess) * cap;
  }
  return total;
}

double hedge_nfd_at_rest(const MatchLedger& actual, const MatchLedger& expert_shadow,
                         std::span<const double> weight_caps) {
  return hedge_nfd(actual, expert_shadow, Decision::skip(), weight_caps);
}

bool condition_nfd(double reward_prev, double w_proposed, double expert_reward,
                   double hedge, const SwitchConfig& cfg) {
  if (cfg.rho == 0.0) return true;
  if (std::isinf(hedge)) return false;
  const double rhs = cfg.rho * (expert_reward + hedge) - cfg.budget_b;
  return reward_prev + w_proposed >= rhs - kRobustnessTol;
}

namespace {

// Best prefix-sum advantage of one sorted-increasing top set over another,
// clamped at zero.
double top_set_advantage(const std::vector<double>& mine,
                         const std::vector<double>& theirs) {
  double prefix = 0.0;
  double best = -kInf;
  for (std::size_t j = 0; j < mine.size(); ++j) {
    prefix += mine[j] - theirs[j];
    best = std::max(best, prefix);
  }
  return std::max(best, 0.0);
}

}  // namespace

double hedge_fd(const MatchLedger& actual, const MatchLedger& expert_shadow,
                const Decision& proposal, std::span<const double> weight_row) {
  double total = 0.0;
  for (int u = 0; u < actual.num_offline(); ++u) {
    const int cap = actual.capacity(u);
    std::vector<double> mine = actual.matched(u);
    if (!proposal.is_skip() && proposal.index() == u) {
      mine.push_back(weight_row[static_cast<std::size_t>(u)]);
    }
    total += top_set_advantage(top_set(mine, cap),
                               top_set(expert_shadow.matched(u), cap));
  }
  return total;
}

double hedge_fd_at_rest(const MatchLedger& actual, const MatchLedger& expert_shadow) {
  double total = 0.0;
  for (int u = 0; u < actual.num_offline(); ++u) {
    const int cap = actual.capacity(u);
    total += top_set_advantage(top_set(actual.matched(u), cap),
                               top_set(expert_shadow.matched(u), cap));
  }
  return total;
}

bool condition_fd(double reward_prev, double delta_f_proposed, double expert_reward,
                  double g, const SwitchConfig& cfg) {
  if (cfg.rho == 0.0) return true;
  const double rhs = cfg.rho * (expert_reward + g) - cfg.budget_b;
  return reward_prev + delta_f_proposed >= rhs - kRobustnessTol;
}

namespace {

// The three-way branch shared by lomar_step and the episode runner, given
// an already-evaluated switching condition.
Decision select_branch(bool condition, const Decision& proposal,
                       const Decision& expert_decision, const MatchLedger& actual,
                       Setting setting) {
  if (condition) return proposal;
  if (setting == Setting::kFreeDisposal) return expert_decision;
  if (expert_decision.is_skip() || actual.available(expert_decision.index())) {
    return expert_decision;
  }
  return Decision::skip();
}

double proposal_hedge(const MatchLedger& actual, const MatchLedger& expert_shadow,
                      const Decision& proposal, std::span<const double> weight_row,
                      std::span<const double> weight_caps, Setting setting) {
  return setting == Setting::kNoFreeDisposal
             ? hedge_nfd(actual, expert_shadow, proposal, weight_caps)
             : hedge_fd(actual, expert_shadow, proposal, weight_row);
}

bool switching_condition(const MatchLedger& actual, const MatchLedger& expert_shadow,
                         const Decision& proposal, double hedge,
                         std::span<const double> weight_row, const SwitchConfig& cfg) {
  const double gain = actual.peek_gain(proposal, weight_row);
  return cfg.setting == Setting::kNoFreeDisposal
             ? condition_nfd(actual.reward(), gain, expert_shadow.reward(), hedge, cfg)
             : condition_fd(actual.reward(), gain, expert_shadow.reward(), hedge, cfg);
}

}  // namespace

Decision lomar_step(const MatchLedger& actual, const MatchLedger& expert_shadow,
                    const Decision& proposal, const Decision& expert_decision,
                    std::span<const double> weight_row,
                    std::span<const double> weight_caps, const SwitchConfig& cfg) {
  const double hedge =
      proposal_hedge(actual, expert_shadow, proposal, weight_row, weight_caps, cfg.setting);
  const bool ok =
      switching_condition(actual, expert_shadow, proposal, hedge, weight_row, cfg);
  return select_branch(ok, proposal, expert_decision, actual, cfg.setting);
}

EpisodeEngine::EpisodeEngine(const ProblemInstance& instance, ExpertKind expert_kind,
                             Setting setting)
    : instance_(&instance),
      actual_(setting, instance.capacities),
      shadow_(setting, instance.capacities),
      expert_(make_expert(expert_kind, instance.num_online())) {
  state_.instance = instance_;
  state_.actual = &actual_;
  state_.weight_history.resize(static_cast<std::size_t>(instance.num_offline));
  state_.positive_seen.assign(static_cast<std::size_t>(instance.num_offline), 0);
}

std::span<const double> EpisodeEngine::row(int step) const {
  return instance_->arrivals[static_cast<std::size_t>(step - 1)];
}

Decision EpisodeEngine::advance_expert(int step) {
  const auto weight_row = row(step);
  const Decision d = expert_->decide(shadow_, weight_row, step);
  shadow_.apply(d, weight_row);
  return d;
}

Decision EpisodeEngine::sanitize_proposal(const Decision& proposal) const {
  if (proposal.is_skip()) return proposal;
  if (proposal.index() < 0 || proposal.index() >= actual_.num_offline())
    return Decision::skip();
  if (!actual_.available(proposal.index())) return Decision::skip();
  return proposal;
}

double EpisodeEngine::commit(const Decision& decision, int step) {
  const auto weight_row = row(step);
  const double gain = actual_.apply(decision, weight_row);
  for (int u = 0; u < actual_.num_offline(); ++u) {
    const double w = weight_row[static_cast<std::size_t>(u)];
    state_.weight_history[static_cast<std::size_t>(u)].add(w);
    if (w > 0.0) ++state_.positive_seen[static_cast<std::size_t>(u)];
  }
  ++state_.arrivals_seen;
  if (decision.is_skip()) ++state_.skips;
  return gain;
}

namespace {

double audit_slack(const EpisodeEngine& engine, std::span<const double> weight_caps,
                   const SwitchConfig& cfg) {
  const double reward = engine.actual().reward();
  if (cfg.rho == 0.0) return reward + cfg.budget_b;
  const double rest = cfg.setting == Setting::kNoFreeDisposal
                          ? hedge_nfd_at_rest(engine.actual(), engine.shadow(), weight_caps)
                          : hedge_fd_at_rest(engine.actual(), engine.shadow());
  return reward - (cfg.rho * (engine.shadow().reward() + rest) - cfg.budget_b);
}

}  // namespace

RunTrace run_episode(const ProblemInstance& instance, Proposer& proposer,
                     ExpertKind expert_kind, const SwitchConfig& cfg) {
  if (!(cfg.rho >= 0.0 && cfg.rho <= 1.0)) throw ConfigError("rho must be in [0, 1]");
  if (!(cfg.budget_b >= 0.0)) throw ConfigError("budget_b must be >= 0");
  EpisodeEngine engine(instance, expert_kind, cfg.setting);
  RunTrace trace;
  trace.steps.reserve(static_cast<std::size_t>(instance.num_online()));

  for (int step = 1; step <= instance.num_online(); ++step) {
    const auto weight_row = engine.row(step);
    const Decision expert_decision = engine.advance_expert(step);
    const Decision proposal =
        engine.sanitize_proposal(proposer.propose(engine.state(), weight_row, step));

    StepRecord rec;
    rec.proposed = proposal;
    rec.expert = expert_decision;
    rec.hedge = proposal_hedge(engine.actual(), engine.shadow(), proposal, weight_row,
                               instance.weight_caps, cfg.setting);
    rec.condition = switching_condition(engine.actual(), engine.shadow(), proposal,
                                        rec.hedge, weight_row, cfg);
    rec.actual = select_branch(rec.condition, proposal, expert_decision, engine.actual(),
                               cfg.setting);
    rec.gain = engine.commit(rec.actual, step);
    rec.reward = engine.actual().reward();
    rec.expert_reward = engine.shadow().reward();
    rec.slack = audit_slack(engine, instance.weight_caps, cfg);
    trace.steps.push_back(rec);
  }

  trace.final_reward = engine.actual().reward();
  trace.final_expert_reward = engine.shadow().reward();
  return trace;
}

RunTrace run_expert_alone(const ProblemInstance& instance, ExpertKind expert_kind,
                          Setting setting) {
  auto expert = make_expert(expert_kind, instance.num_online());
  MatchLedger ledger(setting, instance.capacities);
  RunTrace trace;
  trace.steps.reserve(static_cast<std::size_t>(instance.num_online()));
  for (int step = 1; step <= instance.num_online(); ++step) {
    const auto& weight_row = instance.arrivals[static_cast<std::size_t>(step - 1)];
    StepRecord rec;
    rec.expert = expert->decide(ledger, weight_row, step);
    rec.actual = rec.expert;
    rec.proposed = rec.expert;
    rec.condition = true;
    rec.gain = ledger.apply(rec.actual, weight_row);
    rec.reward = ledger.reward();
    rec.expert_reward = ledger.reward();
    trace.steps.push_back(rec);
  }
  trace.final_reward = ledger.reward();
  trace.final_expert_reward = ledger.reward();
  return trace;
}

}  // namespace matchlab
