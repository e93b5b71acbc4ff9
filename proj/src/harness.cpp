#include "matchlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "matchlab/errors.hpp"
#include "matchlab/oracle.hpp"

namespace matchlab {

using ordered_json = nlohmann::ordered_json;

namespace {
constexpr double kQuietNan = std::numeric_limits<double>::quiet_NaN();
}

std::string algo_kind_name(AlgoKind kind) {
  switch (kind) {
    case AlgoKind::kGreedy: return "greedy";
    case AlgoKind::kOsm: return "osm";
    case AlgoKind::kOpt: return "opt";
    case AlgoKind::kLomar: return "lomar";
    case AlgoKind::kDrl: return "drl";
    case AlgoKind::kDrlOs: return "drl-os";
  }
  return "unknown";
}

AlgoKind algo_kind_from_name(const std::string& name) {
  if (name == "greedy") return AlgoKind::kGreedy;
  if (name == "osm") return AlgoKind::kOsm;
  if (name == "opt") return AlgoKind::kOpt;
  if (name == "lomar") return AlgoKind::kLomar;
  if (name == "drl") return AlgoKind::kDrl;
  if (name == "drl-os") return AlgoKind::kDrlOs;
  throw UsageError("unknown algorithm: " + name);
}

namespace {

// Evaluates fn(i) for i in [0, n) across a thread pool, writing results by
// index. Results and surfaced exceptions depend only on the index order,
// never on scheduling, so reports stay byte-identical.
template <typename Fn>
std::vector<double> indexed_parallel(std::size_t n, Fn&& fn) {
  std::vector<double> results(n);
  std::vector<std::exception_ptr> errors(n);
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          results[i] = fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

// Tail-first percentile over ratios: p100 is the worst value, p50 the
// median, computed by nearest rank on the descending-sorted list.
double tail_percentile(const std::vector<double>& sorted_desc, double p) {
  if (sorted_desc.empty()) return kQuietNan;
  const double pos = (p / 100.0) * static_cast<double>(sorted_desc.size() - 1);
  const auto idx = static_cast<std::size_t>(std::llround(pos));
  return sorted_desc[std::min(idx, sorted_desc.size() - 1)];
}

std::vector<double> run_algorithm(const AlgoSpec& spec,
                                  const std::vector<ProblemInstance>& instances,
                                  Setting setting, ExpertKind expert,
                                  const std::vector<double>& opt_values) {
  const bool needs_policy = spec.kind == AlgoKind::kLomar || spec.kind == AlgoKind::kDrl ||
                            spec.kind == AlgoKind::kDrlOs;
  if (needs_policy && spec.policy == nullptr) {
    throw UsageError(spec.label + " requires a policy");
  }
  return indexed_parallel(instances.size(), [&](std::size_t i) {
    const auto& inst = instances[i];
    double reward = 0.0;
    switch (spec.kind) {
      case AlgoKind::kOpt:
        reward = opt_values[i];
        break;
      case AlgoKind::kGreedy:
        reward = run_expert_alone(inst, ExpertKind::kGreedy, setting).final_reward;
        break;
      case AlgoKind::kOsm:
        reward = run_expert_alone(inst, ExpertKind::kOsm, setting).final_reward;
        break;
      case AlgoKind::kLomar:
      case AlgoKind::kDrl:
      case AlgoKind::kDrlOs: {
        const double rho = spec.kind == AlgoKind::kDrl ? 0.0 : spec.rho;
        const SwitchConfig cfg{rho, spec.budget_b, setting};
        PolicyProposer proposer(*spec.policy);
        const RunTrace trace = run_episode(inst, proposer, expert, cfg);
        if (trace.final_reward <
            rho * trace.final_expert_reward - spec.budget_b - kRobustnessTol) {
          throw InternalInvariantError(
              "robustness bound violated by " + spec.label + " on instance " +
              std::to_string(i));
        }
        reward = trace.final_reward;
        break;
      }
    }
    if (reward > opt_values[i] + kRobustnessTol) {
      throw InternalInvariantError(spec.label + " exceeded the offline optimum on instance " +
                                   std::to_string(i));
    }
    return reward;
  });
}

}  // namespace

EvalReport evaluate(const std::vector<ProblemInstance>& instances,
                    const std::vector<AlgoSpec>& algos, Setting setting,
                    ExpertKind expert, std::uint64_t seed, CrReference cr_reference) {
  if (instances.empty()) throw UsageError("no instances to evaluate");

  EvalReport report;
  report.setting = setting;
  report.expert = expert;
  report.cr_reference = cr_reference;
  report.seed = seed;
  report.n_instances = static_cast<int>(instances.size());
  report.opt_values = indexed_parallel(
      instances.size(), [&](std::size_t i) { return opt_flow(instances[i]).value; });

  std::vector<double> expert_rewards;
  if (cr_reference == CrReference::kExpert ||
      std::any_of(algos.begin(), algos.end(), [&](const AlgoSpec& s) {
        return (s.kind == AlgoKind::kGreedy && expert == ExpertKind::kGreedy) ||
               (s.kind == AlgoKind::kOsm && expert == ExpertKind::kOsm);
      })) {
    expert_rewards = indexed_parallel(instances.size(), [&](std::size_t i) {
      return run_expert_alone(instances[i], expert, setting).final_reward;
    });
  }

  std::vector<std::vector<double>> all_rewards;
  all_rewards.reserve(algos.size());
  for (const auto& spec : algos) {
    all_rewards.push_back(run_algorithm(spec, instances, setting, expert, report.opt_values));
  }
  std::vector<double> drl_rewards;
  for (std::size_t a = 0; a < algos.size(); ++a) {
    if (algos[a].kind == AlgoKind::kDrl && drl_rewards.empty()) {
      drl_rewards = all_rewards[a];
    }
  }

  for (std::size_t a = 0; a < algos.size(); ++a) {
    const auto& spec = algos[a];
    AlgoReport row;
    row.kind = spec.kind;
    row.label = spec.label.empty() ? algo_kind_name(spec.kind) : spec.label;
    row.rho = spec.kind == AlgoKind::kDrl ? 0.0 : spec.rho;
    row.budget_b = spec.budget_b;
    row.rewards = all_rewards[a];

    double sum = 0.0;
    for (double r : row.rewards) sum += r;
    row.avg = sum / static_cast<double>(row.rewards.size());

    const std::vector<double>& reference =
        cr_reference == CrReference::kExpert ? expert_rewards : report.opt_values;
    std::vector<double> valid_ratios;
    row.ratios.reserve(row.rewards.size());
    for (std::size_t i = 0; i < row.rewards.size(); ++i) {
      if (reference[i] > 0.0) {
        const double ratio = row.rewards[i] / reference[i];
        row.ratios.push_back(ratio);
        valid_ratios.push_back(ratio);
      } else {
        row.ratios.push_back(kQuietNan);
        ++row.n_opt_zero;
      }
    }
    std::sort(valid_ratios.begin(), valid_ratios.end(), std::greater<>());
    row.cr = valid_ratios.empty() ? kQuietNan : valid_ratios.back();
    row.p50 = tail_percentile(valid_ratios, 50.0);
    row.p90 = tail_percentile(valid_ratios, 90.0);
    row.p99 = tail_percentile(valid_ratios, 99.0);
    row.p100 = tail_percentile(valid_ratios, 100.0);

    if (!expert_rewards.empty()) {
      row.ratio_vs_expert.reserve(row.rewards.size());
      for (std::size_t i = 0; i < row.rewards.size(); ++i) {
        row.ratio_vs_expert.push_back(
            expert_rewards[i] > 0.0 ? row.rewards[i] / expert_rewards[i] : kQuietNan);
      }
    }
    if (!drl_rewards.empty()) {
      row.ratio_vs_drl.reserve(row.rewards.size());
      for (std::size_t i = 0; i < row.rewards.size(); ++i) {
        row.ratio_vs_drl.push_back(
            drl_rewards[i] > 0.0 ? row.rewards[i] / drl_rewards[i] : kQuietNan);
      }
    }
    report.algorithms.push_back(std::move(row));
  }
  return report;
}

namespace {

ordered_json nan_to_null(double x) {
  if (std::isnan(x)) return nullptr;
  return x;
}

ordered_json double_vector_to_json(const std::vector<double>& xs) {
  ordered_json arr = ordered_json::array();
  for (double x : xs) arr.push_back(nan_to_null(x));
  return arr;
}

std::vector<double> double_vector_from_json(const ordered_json& arr) {
  std::vector<double> xs;
  for (const auto& x : arr) xs.push_back(x.is_null() ? kQuietNan : x.get<double>());
  return xs;
}

std::string dump_number(double x) {
  return ordered_json(nan_to_null(x)).dump();
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  ordered_json j;
  j["setting"] = report.setting == Setting::kNoFreeDisposal ? "nfd" : "fd";
  j["expert"] = report.expert == ExpertKind::kGreedy ? "greedy" : "osm";
  j["cr_reference"] = report.cr_reference == CrReference::kOpt ? "opt" : "expert";
  j["seed"] = report.seed;
  j["n_instances"] = report.n_instances;
  j["opt_values"] = double_vector_to_json(report.opt_values);
  ordered_json rows = ordered_json::array();
  for (const auto& row : report.algorithms) {
    ordered_json r;
    r["algo"] = row.label;
    r["kind"] = algo_kind_name(row.kind);
    r["rho"] = row.rho;
    r["b"] = row.budget_b;
    r["avg"] = row.avg;
    r["cr"] = nan_to_null(row.cr);
    r["p50"] = nan_to_null(row.p50);
    r["p90"] = nan_to_null(row.p90);
    r["p99"] = nan_to_null(row.p99);
    r["p100"] = nan_to_null(row.p100);
    r["n_opt_zero"] = row.n_opt_zero;
    r["rewards"] = double_vector_to_json(row.rewards);
    r["ratios"] = double_vector_to_json(row.ratios);
    if (!row.ratio_vs_expert.empty())
      r["ratio_vs_expert"] = double_vector_to_json(row.ratio_vs_expert);
    if (!row.ratio_vs_drl.empty())
      r["ratio_vs_drl"] = double_vector_to_json(row.ratio_vs_drl);
    rows.push_back(std::move(r));
  }
  j["algorithms"] = std::move(rows);
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  EvalReport report;
  try {
    report.setting = j.at("setting").get<std::string>() == "fd"
                         ? Setting::kFreeDisposal
                         : Setting::kNoFreeDisposal;
    report.expert = j.at("expert").get<std::string>() == "osm" ? ExpertKind::kOsm
                                                               : ExpertKind::kGreedy;
    report.cr_reference = j.at("cr_reference").get<std::string>() == "expert"
                              ? CrReference::kExpert
                              : CrReference::kOpt;
    report.seed = j.at("seed").get<std::uint64_t>();
    report.n_instances = j.at("n_instances").get<int>();
    report.opt_values = double_vector_from_json(j.at("opt_values"));
    for (const auto& r : j.at("algorithms")) {
      AlgoReport row;
      row.label = r.at("algo").get<std::string>();
      row.kind = algo_kind_from_name(r.at("kind").get<std::string>());
      row.rho = r.at("rho").get<double>();
      row.budget_b = r.at("b").get<double>();
      row.avg = r.at("avg").get<double>();
      row.cr = r.at("cr").is_null() ? kQuietNan : r.at("cr").get<double>();
      row.p50 = r.at("p50").is_null() ? kQuietNan : r.at("p50").get<double>();
      row.p90 = r.at("p90").is_null() ? kQuietNan : r.at("p90").get<double>();
      row.p99 = r.at("p99").is_null() ? kQuietNan : r.at("p99").get<double>();
      row.p100 = r.at("p100").is_null() ? kQuietNan : r.at("p100").get<double>();
      row.n_opt_zero = r.at("n_opt_zero").get<int>();
      row.rewards = double_vector_from_json(r.at("rewards"));
      row.ratios = double_vector_from_json(r.at("ratios"));
      if (r.contains("ratio_vs_expert"))
        row.ratio_vs_expert = double_vector_from_json(r.at("ratio_vs_expert"));
      if (r.contains("ratio_vs_drl"))
        row.ratio_vs_drl = double_vector_from_json(r.at("ratio_vs_drl"));
      report.algorithms.push_back(std::move(row));
    }
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  return report;
}

void render_report(const EvalReport& report, const std::string& format,
                   std::ostream& out) {
  if (format == "json") {
    out << report_to_json(report);
    return;
  }
  if (format == "csv") {
    out << "algo,avg,cr,p50,p90,p99,p100,n_instances,n_opt_zero\n";
    for (const auto& row : report.algorithms) {
      out << row.label << ',' << dump_number(row.avg) << ',' << dump_number(row.cr)
          << ',' << dump_number(row.p50) << ',' << dump_number(row.p90) << ','
          << dump_number(row.p99) << ',' << dump_number(row.p100) << ','
          << report.n_instances << ',' << row.n_opt_zero << '\n';
    }
    return;
  }
  throw UsageError("unknown report format: " + format);
}

}  // namespace matchlab
