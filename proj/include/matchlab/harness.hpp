#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "matchlab/instance.hpp"
#include "matchlab/policy.hpp"

namespace matchlab {

enum class AlgoKind { kGreedy, kOsm, kOpt, kLomar, kDrl, kDrlOs };

std::string algo_kind_name(AlgoKind kind);
AlgoKind algo_kind_from_name(const std::string& name);

struct AlgoSpec {
  AlgoKind kind = AlgoKind::kGreedy;
  std::string label;                     // defaults to the kind name
  double rho = 0.0;                      // ignored for greedy/osm/opt; 0 for drl
  double budget_b = 0.0;
  const PolicyParams* policy = nullptr;  // required for lomar/drl/drl-os
};

// Reward ratios are reported tail-first: the p-th percentile is the value
// p% of the way from the best ratio down to the worst, so p100 is the
// worst ratio and equals CR.
struct AlgoReport {
  std::string label;
  AlgoKind kind = AlgoKind::kGreedy;
  double rho = 0.0;
  double budget_b = 0.0;
  double avg = 0.0;
  double cr = 0.0;
  double p50 = 0.0, p90 = 0.0, p99 = 0.0, p100 = 0.0;
  int n_opt_zero = 0;                    // instances excluded from ratios
  std::vector<double> rewards;           // per instance
  std::vector<double> ratios;            // per instance vs the CR reference;
                                         // NaN where the reference is 0
  std::vector<double> ratio_vs_expert;   // empty unless the expert row ran
  std::vector<double> ratio_vs_drl;      // empty unless a drl row ran
};

enum class CrReference { kOpt, kExpert };

struct EvalReport {
  Setting setting = Setting::kNoFreeDisposal;
  ExpertKind expert = ExpertKind::kGreedy;
  CrReference cr_reference = CrReference::kOpt;
  std::uint64_t seed = 0;
  int n_instances = 0;
  std::vector<double> opt_values;
  std::vector<AlgoReport> algorithms;    // in request order
};

// Runs every algorithm on every instance, aggregates, and audits:
// every reward <= OPT + tol, and every switching run satisfies
// R >= rho * R_expert - B - tol (violations abort with
// InternalInvariantError). Deterministic given the seed.
EvalReport evaluate(const std::vector<ProblemInstance>& instances,
                    const std::vector<AlgoSpec>& algos, Setting setting,
                    ExpertKind expert, std::uint64_t seed,
                    CrReference cr_reference = CrReference::kOpt);

// format "json": the full report, parseable by report_from_json.
// format "csv": one row per algorithm with the aggregate columns.
void render_report(const EvalReport& report, const std::string& format,
                   std::ostream& out);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

}  // namespace matchlab
