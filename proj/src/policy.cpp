#include "matchlab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "matchlab/errors.hpp"

namespace matchlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

FeatureVector extract_features(const RunState& state, int u, int step,
                               std::span<const double> weight_row) {
  const MatchLedger& actual = *state.actual;
  const int n = actual.num_offline();
  const int num_online = state.instance->num_online();
  const auto uu = static_cast<std::size_t>(u);

  FeatureVector f{};
  f[0] = weight_row[uu];

  const double cap = static_cast<double>(actual.capacity(u));
  f[1] = std::clamp((cap - static_cast<double>(actual.count(u))) / cap, 0.0, 1.0);

  f[2] = state.weight_history[uu].n > 0 ? state.weight_history[uu].mean : 0.0;
  f[3] = state.weight_history[uu].variance();
  f[4] = state.arrivals_seen > 0 ? static_cast<double>(state.positive_seen[uu]) /
                                       static_cast<double>(state.arrivals_seen)
                                 : 0.0;
  f[5] = static_cast<double>(step) / static_cast<double>(num_online);

  int row_positive = 0;
  int at_capacity = 0;
  for (int i = 0; i < n; ++i) {
    if (weight_row[static_cast<std::size_t>(i)] > 0.0) ++row_positive;
    if (actual.count(i) >= actual.capacity(i)) ++at_capacity;
  }
  f[6] = static_cast<double>(row_positive) / static_cast<double>(n);

  const auto& matched = actual.matched(u);
  if (!matched.empty()) {
    double mx = -kInf, mn = kInf, sum = 0.0;
    for (double w : matched) {
      mx = std::max(mx, w);
      mn = std::min(mn, w);
      sum += w;
    }
    const double mean = sum / static_cast<double>(matched.size());
    double m2 = 0.0;
    for (double w : matched) m2 += (w - mean) * (w - mean);
    f[7] = mx;
    f[8] = mn;
    f[9] = mean;
    f[10] = m2 / static_cast<double>(matched.size());
  }

  f[11] = static_cast<double>(at_capacity) / static_cast<double>(n);
  f[12] = state.arrivals_seen > 0 ? static_cast<double>(state.skips) /
                                        static_cast<double>(state.arrivals_seen)
                                  : 0.0;
  f[13] = actual.reward() / static_cast<double>(n);
  return f;
}

int PolicyParams::parameter_count() const {
  int total = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    total += dims[l + 1] * dims[l] + dims[l + 1];
  }
  return total;
}

PolicyParams init_policy(std::span<const int> dims, std::uint64_t seed) {
  PolicyParams p;
  p.dims.assign(dims.begin(), dims.end());
  SplitMix64 rng(seed);
  for (std::size_t l = 0; l + 1 < p.dims.size(); ++l) {
    const int fan_in = p.dims[l];
    const int fan_out = p.dims[l + 1];
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::vector<double> w(static_cast<std::size_t>(fan_out) * fan_in);
    for (auto& x : w) x = rng.uniform(-a, a);
    std::vector<double> b(static_cast<std::size_t>(fan_out));
    for (auto& x : b) x = rng.uniform(-a, a);
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  return p;
}

std::vector<double> flatten(const PolicyParams& params) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(params.parameter_count()));
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    flat.insert(flat.end(), params.weights[l].begin(), params.weights[l].end());
    flat.insert(flat.end(), params.biases[l].begin(), params.biases[l].end());
  }
  return flat;
}

void assign_flat(PolicyParams& params, std::span<const double> flat) {
  std::size_t k = 0;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    for (auto& x : params.weights[l]) x = flat[k++];
    for (auto& x : params.biases[l]) x = flat[k++];
  }
}

namespace {

// Activations per layer kept for the backward pass. acts[0] is the input,
// acts[l+1] the output of layer l (post-rectifier on hidden layers).
struct ForwardCache {
  std::vector<std::vector<double>> acts;
};

double mlp_forward(const PolicyParams& p, std::span<const double> input,
                   ForwardCache* cache) {
  if (static_cast<int>(input.size()) != p.dims.front()) {
    throw ValidationError("network expects " + std::to_string(p.dims.front()) +
                          " inputs, got " + std::to_string(input.size()));
  }
  const std::size_t num_layers = p.weights.size();
  std::vector<double> cur(input.begin(), input.end());
  if (cache) {
    cache->acts.clear();
    cache->acts.push_back(cur);
  }
  for (std::size_t l = 0; l < num_layers; ++l) {
    const int in_dim = p.dims[l];
    const int out_dim = p.dims[l + 1];
    const bool hidden = l + 1 < num_layers;
    std::vector<double> next(static_cast<std::size_t>(out_dim));
    const double* w = p.weights[l].data();
    for (int o = 0; o < out_dim; ++o) {
      double acc = p.biases[l][static_cast<std::size_t>(o)];
      const double* row = w + static_cast<std::size_t>(o) * in_dim;
      for (int i = 0; i < in_dim; ++i) acc += row[i] * cur[static_cast<std::size_t>(i)];
      if (hidden && acc < 0.0) acc = 0.0;
      next[static_cast<std::size_t>(o)] = acc;
    }
    for (double x : next) {
      if (!std::isfinite(x)) {
        throw NumericError("non-finite activation at layer " + std::to_string(l));
      }
    }
    cur = std::move(next);
    if (cache) cache->acts.push_back(cur);
  }
  return cur[0];
}

// Accumulates d(out)/d(theta) * upstream into grad (flat layout).
void mlp_backward(const PolicyParams& p, const ForwardCache& cache, double upstream,
                  std::vector<double>& grad) {
  const std::size_t num_layers = p.weights.size();
  std::vector<double> delta{upstream};
  // Flat offsets of each layer's weight block.
  std::vector<std::size_t> offsets(num_layers);
  std::size_t off = 0;
  for (std::size_t l = 0; l < num_layers; ++l) {
    offsets[l] = off;
    off += static_cast<std::size_t>(p.dims[l + 1]) * p.dims[l] + p.dims[l + 1];
  }
  for (std::size_t l = num_layers; l-- > 0;) {
    const int in_dim = p.dims[l];
    const int out_dim = p.dims[l + 1];
    const bool hidden = l + 1 < num_layers;
    const auto& in_act = cache.acts[l];
    const auto& out_act = cache.acts[l + 1];
    // Rectifier gate: units that were clamped pass no gradient.
    if (hidden) {
      for (int o = 0; o < out_dim; ++o) {
        if (out_act[static_cast<std::size_t>(o)] <= 0.0) delta[static_cast<std::size_t>(o)] = 0.0;
      }
    }
    double* gw = grad.data() + offsets[l];
    double* gb = gw + static_cast<std::size_t>(out_dim) * in_dim;
    const double* w = p.weights[l].data();
    std::vector<double> prev_delta(static_cast<std::size_t>(in_dim), 0.0);
    for (int o = 0; o < out_dim; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      if (d == 0.0) continue;
      double* grow = gw + static_cast<std::size_t>(o) * in_dim;
      const double* wrow = w + static_cast<std::size_t>(o) * in_dim;
      for (int i = 0; i < in_dim; ++i) {
        grow[i] += d * in_act[static_cast<std::size_t>(i)];
        prev_delta[static_cast<std::size_t>(i)] += d * wrow[i];
      }
      gb[o] += d;
    }
    delta = std::move(prev_delta);
  }
}

}  // namespace

double policy_forward(const PolicyParams& params, std::span<const double> input) {
  return mlp_forward(params, input, nullptr);
}

std::vector<double> score_items(const PolicyParams& params,
                                const std::vector<FeatureVector>& features,
                                std::span<const double> weight_row) {
  std::vector<double> scores(features.size());
  for (std::size_t u = 0; u < features.size(); ++u) {
    scores[u] = weight_row[u] - mlp_forward(params, features[u], nullptr);
  }
  return scores;
}

Decision rl_decide(std::span<const double> scores, const std::vector<bool>& available) {
  Decision best = Decision::skip();
  double best_score = 0.0;  // skip's score
  for (std::size_t u = 0; u < scores.size(); ++u) {
    if (!available[u]) continue;
    if (scores[u] > best_score) {
      best_score = scores[u];
      best = Decision::assign(static_cast<int>(u));
    }
  }
  return best;
}

double reward_difference(const MatchLedger& actual, const MatchLedger& expert_shadow,
                         const Decision& proposal, std::span<const double> weight_row,
                         std::span<const double> weight_caps, const SwitchConfig& cfg) {
  const double gain = actual.peek_gain(proposal, weight_row);
  if (cfg.rho == 0.0) return actual.reward() + gain + cfg.budget_b;
  const double hedge = cfg.setting == Setting::kNoFreeDisposal
                           ? hedge_nfd(actual, expert_shadow, proposal, weight_caps)
                           : hedge_fd(actual, expert_shadow, proposal, weight_row);
  if (std::isinf(hedge)) return -kInf;
  return actual.reward() + gain + cfg.budget_b -
         cfg.rho * (expert_shadow.reward() + hedge);
}

double p_os(double r_diff, double temperature) {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
  const double z = r_diff / temperature;
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

ActionDistribution rl_action_probs(std::span<const double> scores,
                                   const std::vector<bool>& available) {
  const std::size_t n = scores.size();
  ActionDistribution dist;
  dist.probs.assign(n + 1, 0.0);

  double max_score = 0.0;  // skip participates with score 0
  for (std::size_t u = 0; u < n; ++u) {
    if (available[u]) max_score = std::max(max_score, scores[u]);
  }
  double z = std::exp(0.0 - max_score);  // skip
  dist.probs[n] = z;
  for (std::size_t u = 0; u < n; ++u) {
    if (!available[u]) continue;
    const double e = std::exp(scores[u] - max_score);
    dist.probs[u] = e;
    z += e;
  }
  for (auto& p : dist.probs) p /= z;
  return dist;
}

ActionDistribution mixture_prob(const ActionDistribution& rl, double p_follow_rl,
                                const Decision& expert_target) {
  ActionDistribution mix;
  mix.probs.resize(rl.probs.size());
  for (std::size_t i = 0; i < rl.probs.size(); ++i) {
    mix.probs[i] = p_follow_rl * rl.probs[i];
  }
  const std::size_t target = expert_target.is_skip()
                                 ? rl.probs.size() - 1
                                 : static_cast<std::size_t>(expert_target.index());
  mix.probs[target] += 1.0 - p_follow_rl;
  return mix;
}

namespace {

std::vector<bool> availability(const MatchLedger& ledger) {
  std::vector<bool> avail(static_cast<std::size_t>(ledger.num_offline()));
  for (int u = 0; u < ledger.num_offline(); ++u) avail[static_cast<std::size_t>(u)] = ledger.available(u);
  return avail;
}

Decision expert_target_for_mixture(const Decision& expert_decision,
                                   const MatchLedger& actual) {
  if (expert_decision.is_skip()) return expert_decision;
  if (!actual.available(expert_decision.index())) return Decision::skip();
  return expert_decision;
}

Decision sample_action(const ActionDistribution& dist, SplitMix64& rng) {
  const double r = rng.next_double();
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < dist.probs.size(); ++i) {
    cum += dist.probs[i];
    if (r < cum) return Decision::assign(static_cast<int>(i));
  }
  return Decision::skip();
}

// Per-step context shared by the sampling rollout and the replay paths.
struct StepContext {
  std::vector<FeatureVector> features;
  std::vector<double> scores;
  std::vector<bool> avail;
  Decision proposal = Decision::skip();
  double p_follow = 0.0;
  ActionDistribution rl;
  ActionDistribution mix;
};

StepContext compute_step(const PolicyParams& params, const EpisodeEngine& engine,
                         const Decision& expert_decision, int step,
                         const SwitchConfig& cfg, double temperature) {
  const auto row = engine.row(step);
  const int n = engine.actual().num_offline();
  StepContext ctx;
  ctx.features.reserve(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) {
    ctx.features.push_back(extract_features(engine.state(), u, step, row));
  }
  ctx.scores = score_items(params, ctx.features, row);
  ctx.avail = availability(engine.actual());
  ctx.proposal = rl_decide(ctx.scores, ctx.avail);
  const double rdiff =
      reward_difference(engine.actual(), engine.shadow(), ctx.proposal, row,
                        engine.state().instance->weight_caps, cfg);
  ctx.p_follow = p_os(rdiff, temperature);
  ctx.rl = rl_action_probs(ctx.scores, ctx.avail);
  ctx.mix = mixture_prob(ctx.rl, ctx.p_follow,
                         expert_target_for_mixture(expert_decision, engine.actual()));
  return ctx;
}

}  // namespace

Trajectory rollout_sampled(const ProblemInstance& instance, const PolicyParams& params,
                           ExpertKind expert_kind, const SwitchConfig& cfg,
                           double temperature, SplitMix64& rng) {
  EpisodeEngine engine(instance, expert_kind, cfg.setting);
  Trajectory traj;
  traj.instance = instance;
  traj.expert_kind = expert_kind;
  traj.cfg = cfg;
  traj.temperature = temperature;

  for (int step = 1; step <= instance.num_online(); ++step) {
    const Decision expert_decision = engine.advance_expert(step);
    const StepContext ctx =
        compute_step(params, engine, expert_decision, step, cfg, temperature);
    const Decision sampled = sample_action(ctx.mix, rng);
    traj.expert_decisions.push_back(expert_decision);
    traj.sampled_decisions.push_back(sampled);
    engine.commit(sampled, step);
  }
  traj.total_reward = engine.actual().reward();
  return traj;
}

namespace {

// Replays a recorded trajectory at the given parameters, calling the
// visitor once per step with the recomputed context, and returns the sum
// of log probabilities of the sampled decisions.
template <typename Visitor>
double replay_trajectory(const PolicyParams& params, const Trajectory& traj,
                         Visitor&& visit) {
  EpisodeEngine engine(traj.instance, traj.expert_kind, traj.cfg.setting);
  double log_prob_sum = 0.0;
  for (int step = 1; step <= traj.instance.num_online(); ++step) {
    const auto i = static_cast<std::size_t>(step - 1);
    // The expert is deterministic; replaying its recorded decision keeps
    // the shadow exactly as it was during sampling.
    engine.advance_expert(step);
    const Decision& expert_decision = traj.expert_decisions[i];
    const StepContext ctx =
        compute_step(params, engine, expert_decision, step, traj.cfg, traj.temperature);
    const Decision& sampled = traj.sampled_decisions[i];
    const double p = ctx.mix.prob(sampled);
    if (!(p > 0.0)) {
      throw NumericError("zero-probability sampled action at step " + std::to_string(step));
    }
    log_prob_sum += std::log(p);
    visit(ctx, sampled, p);
    engine.commit(sampled, step);
  }
  return log_prob_sum;
}

}  // namespace

double trajectory_log_prob(const PolicyParams& params, const Trajectory& traj) {
  return replay_trajectory(params, traj,
                           [](const StepContext&, const Decision&, double) {});
}

std::vector<double> log_prob_gradient(const PolicyParams& params, const Trajectory& traj,
                                      double baseline) {
  std::vector<double> grad(static_cast<std::size_t>(params.parameter_count()), 0.0);
  replay_trajectory(params, traj, [&](const StepContext& ctx, const Decision& sampled,
                                      double p) {
    // d log p / d s_u = p_follow * z(x) * (1{u = x} - z_u) / p for available
    // u; the skip score is constant. Each s_u = w - h(features_u), so the
    // network sees -coeff as upstream gradient.
    const double zx = ctx.rl.prob(sampled);
    for (std::size_t u = 0; u < ctx.scores.size(); ++u) {
      if (!ctx.avail[u]) continue;
      const double indicator =
          (!sampled.is_skip() && static_cast<std::size_t>(sampled.index()) == u) ? 1.0 : 0.0;
      const double coeff = ctx.p_follow * zx * (indicator - ctx.rl.probs[u]) / p;
      if (coeff == 0.0) continue;
      ForwardCache cache;
      mlp_forward(params, ctx.features[u], &cache);
      mlp_backward(params, cache, -coeff, grad);
    }
  });
  const double scale = traj.total_reward - baseline;
  for (auto& g : grad) g *= scale;
  return grad;
}

PolicyParams train(std::span<const ProblemInstance> train_instances,
                   const TrainConfig& cfg) {
  if (train_instances.empty()) throw UsageError("training requires at least one instance");
  if (!(cfg.rho >= 0.0 && cfg.rho <= 1.0)) throw ConfigError("rho must be in [0, 1]");
  if (!(cfg.budget_b >= 0.0)) throw ConfigError("budget_b must be >= 0");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(cfg.temperature_start > 0.0)) throw ConfigError("temperature_start must be > 0");
  if (!(cfg.temperature_decay > 0.0 && cfg.temperature_decay <= 1.0))
    throw ConfigError("temperature_decay must be in (0, 1]");
  if (!(cfg.temperature_floor > 0.0)) throw ConfigError("temperature_floor must be > 0");

  SplitMix64 master(cfg.seed);
  PolicyParams params = init_policy(cfg.dims, master.next());
  SplitMix64 rng(master.next());

  const SwitchConfig scfg{cfg.rho, cfg.budget_b, cfg.setting};
  double temperature = cfg.temperature_start;
  std::vector<double> flat = flatten(params);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<Trajectory> batch;
    batch.reserve(static_cast<std::size_t>(cfg.batch_size));
    for (int i = 0; i < cfg.batch_size; ++i) {
      const auto& inst = train_instances[static_cast<std::size_t>(
          rng.next_below(train_instances.size()))];
      batch.push_back(rollout_sampled(inst, params, cfg.expert, scfg, temperature, rng));
    }
    double baseline = 0.0;
    if (cfg.use_baseline) {
      for (const auto& t : batch) baseline += t.total_reward;
      baseline /= static_cast<double>(cfg.batch_size);
    }
    std::vector<double> grad(flat.size(), 0.0);
    for (const auto& t : batch) {
      const auto g = log_prob_gradient(params, t, baseline);
      for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += g[k];
    }
    const double scale = cfg.learning_rate / static_cast<double>(cfg.batch_size);
    for (std::size_t k = 0; k < flat.size(); ++k) flat[k] += scale * grad[k];
    assign_flat(params, flat);
    for (double x : flat) {
      if (!std::isfinite(x)) {
        throw TrainingError("training diverged at epoch " + std::to_string(epoch));
      }
    }
    temperature = std::max(cfg.temperature_floor, temperature * cfg.temperature_decay);
  }
  return params;
}

void save_policy(const PolicyParams& params, const std::string& path) {
  nlohmann::ordered_json j;
  j["feature_spec_version"] = params.feature_spec_version;
  j["dims"] = params.dims;
  j["activation"] = params.activation;
  j["weights"] = params.weights;
  j["biases"] = params.biases;
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

PolicyParams load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("policy file: ") + e.what());
  }
  PolicyParams p;
  try {
    p.feature_spec_version = j.at("feature_spec_version").get<std::string>();
    p.dims = j.at("dims").get<std::vector<int>>();
    p.activation = j.at("activation").get<std::string>();
    p.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    p.biases = j.at("biases").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("policy file: ") + e.what());
  }
  if (p.feature_spec_version != kFeatureSpecVersion) {
    throw ValidationError("policy feature_spec_version '" + p.feature_spec_version +
                          "' does not match '" + kFeatureSpecVersion + "'");
  }
  if (p.dims.size() < 2 || p.dims.front() != kFeatureDim || p.dims.back() != 1) {
    throw ValidationError("policy dims must run from " + std::to_string(kFeatureDim) +
                          " inputs to 1 output");
  }
  if (p.weights.size() != p.dims.size() - 1 || p.biases.size() != p.dims.size() - 1) {
    throw ValidationError("policy layer count does not match dims");
  }
  for (std::size_t l = 0; l + 1 < p.dims.size(); ++l) {
    const auto expected_w = static_cast<std::size_t>(p.dims[l + 1]) * p.dims[l];
    if (p.weights[l].size() != expected_w ||
        p.biases[l].size() != static_cast<std::size_t>(p.dims[l + 1])) {
      throw ValidationError("policy layer " + std::to_string(l) + " has inconsistent shape");
    }
    for (double x : p.weights[l]) {
      if (!std::isfinite(x)) throw ValidationError("policy has non-finite weights");
    }
    for (double x : p.biases[l]) {
      if (!std::isfinite(x)) throw ValidationError("policy has non-finite biases");
    }
  }
  return p;
}

Decision PolicyProposer::propose(const RunState& state, std::span<const double> weight_row,
                                 int step) {
  const int n = state.actual->num_offline();
  std::vector<FeatureVector> features;
  features.reserve(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) {
    features.push_back(extract_features(state, u, step, weight_row));
  }
  const auto scores = score_items(*params_, features, weight_row);
  return rl_decide(scores, availability(*state.actual));
}

}  // namespace matchlab
