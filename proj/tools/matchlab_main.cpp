#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "matchlab/errors.hpp"
#include "matchlab/harness.hpp"
#include "matchlab/instance.hpp"
#include "matchlab/oracle.hpp"
#include "matchlab/policy.hpp"

namespace {

using namespace matchlab;

Setting parse_setting(const std::string& s) {
  if (s == "nfd") return Setting::kNoFreeDisposal;
  if (s == "fd") return Setting::kFreeDisposal;
  throw UsageError("unknown setting: " + s + " (expected nfd or fd)");
}

ExpertKind parse_expert(const std::string& s) {
  if (s == "greedy") return ExpertKind::kGreedy;
  if (s == "osm") return ExpertKind::kOsm;
  throw UsageError("unknown expert: " + s + " (expected greedy or osm)");
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << contents;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"matchlab: edge-weighted online bipartite matching workbench"};
  app.require_subcommand(1);

  // --- gen ---
  auto* gen = app.add_subcommand("gen", "Generate synthetic problem instances");
  int gen_num_offline = 4, gen_num_online = 12, gen_count = 1;
  int gen_cap_low = 1, gen_cap_high = 1;
  double gen_sparsity = 0.0, gen_wlow = 0.0, gen_whigh = 1.0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--num-offline", gen_num_offline, "Number of offline items");
  gen->add_option("--num-online", gen_num_online, "Number of online arrivals");
  gen->add_option("--count", gen_count, "Number of instances");
  gen->add_option("--seed", gen_seed, "Seed of the first instance; instance i uses seed+i");
  gen->add_option("--sparsity", gen_sparsity, "Probability an edge weight is forced to 0");
  gen->add_option("--wlow", gen_wlow, "Lower bound of the uniform weight draw");
  gen->add_option("--whigh", gen_whigh, "Upper bound of the uniform weight draw");
  gen->add_option("--cap-low", gen_cap_low, "Smallest offline capacity");
  gen->add_option("--cap-high", gen_cap_high, "Largest offline capacity");
  gen->add_option("--out", gen_out, "Output JSONL file")->required();

  // --- train ---
  auto* train_cmd = app.add_subcommand("train", "Train a scoring policy");
  std::string train_instances_path, train_out;
  std::string train_setting = "nfd", train_expert = "greedy";
  double train_rho = 0.0, train_b = 0.0, train_lr = 1e-3;
  double train_t0 = 1.0, train_t_decay = 0.99, train_t_floor = 0.05;
  int train_epochs = 50, train_batch = 100;
  bool train_baseline = false;
  std::uint64_t train_seed = 0;
  train_cmd->add_option("--instances", train_instances_path, "Training JSONL file")->required();
  train_cmd->add_option("--rho", train_rho, "Competitiveness target in [0,1]");
  train_cmd->add_option("--b", train_b, "Additive robustness budget");
  train_cmd->add_option("--setting", train_setting, "nfd or fd");
  train_cmd->add_option("--expert", train_expert, "greedy or osm");
  train_cmd->add_option("--epochs", train_epochs, "Training epochs");
  train_cmd->add_option("--batch", train_batch, "Trajectories per epoch");
  train_cmd->add_option("--lr", train_lr, "Learning rate");
  train_cmd->add_option("--t0", train_t0, "Initial temperature");
  train_cmd->add_option("--t-decay", train_t_decay, "Temperature decay per epoch");
  train_cmd->add_option("--t-floor", train_t_floor, "Temperature floor");
  train_cmd->add_flag("--baseline", train_baseline, "Subtract the batch-mean reward");
  train_cmd->add_option("--seed", train_seed, "Training seed");
  train_cmd->add_option("--out", train_out, "Output policy JSON file")->required();

  // --- run ---
  auto* run_cmd = app.add_subcommand("run", "Evaluate algorithms on an instance file");
  std::string run_instances_path, run_policy_path, run_out;
  std::string run_setting = "nfd", run_expert = "greedy", run_cr_vs = "opt";
  std::vector<std::string> run_algos;
  double run_rho = 0.5, run_b = 0.0;
  std::uint64_t run_seed = 0;
  run_cmd->add_option("--instances", run_instances_path, "JSONL instance file")->required();
  run_cmd->add_option("--algo", run_algos,
                      "Algorithms: lomar, drl, drl-os, greedy, osm, opt (repeat or comma-separate)")
      ->required()
      ->delimiter(',');
  run_cmd->add_option("--policy", run_policy_path, "Policy JSON for lomar/drl/drl-os");
  run_cmd->add_option("--rho", run_rho, "Competitiveness target for lomar/drl-os");
  run_cmd->add_option("--b", run_b, "Additive robustness budget");
  run_cmd->add_option("--setting", run_setting, "nfd or fd");
  run_cmd->add_option("--expert", run_expert, "greedy or osm");
  run_cmd->add_option("--seed", run_seed, "Evaluation seed (recorded in the report)");
  run_cmd->add_option("--cr-vs", run_cr_vs, "CR reference: opt or expert");
  run_cmd->add_option("--out", run_out, "Output report JSON file")->required();

  // --- report ---
  auto* report_cmd = app.add_subcommand("report", "Re-render a report file");
  std::string report_in, report_format = "csv", report_out;
  report_cmd->add_option("--in", report_in, "Report JSON file")->required();
  report_cmd->add_option("--format", report_format, "json or csv");
  report_cmd->add_option("--out", report_out, "Output file")->required();

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    std::vector<ProblemInstance> instances;
    instances.reserve(static_cast<std::size_t>(gen_count));
    for (int i = 0; i < gen_count; ++i) {
      GeneratorConfig config;
      config.num_offline = gen_num_offline;
      config.num_online = gen_num_online;
      config.capacity_low = gen_cap_low;
      config.capacity_high = gen_cap_high;
      config.weight_low = gen_wlow;
      config.weight_high = gen_whigh;
      config.sparsity = gen_sparsity;
      config.seed = gen_seed + static_cast<std::uint64_t>(i);
      instances.push_back(generate_instance(config));
    }
    save_instances(instances, gen_out);
    std::cerr << "wrote " << instances.size() << " instances to " << gen_out << "\n";
    return 0;
  }

  if (train_cmd->parsed()) {
    const auto instances = load_instances(train_instances_path);
    if (instances.empty()) throw UsageError("training file has no instances");
    TrainConfig cfg;
    cfg.epochs = train_epochs;
    cfg.batch_size = train_batch;
    cfg.learning_rate = train_lr;
    cfg.rho = train_rho;
    cfg.budget_b = train_b;
    cfg.setting = parse_setting(train_setting);
    cfg.expert = parse_expert(train_expert);
    cfg.temperature_start = train_t0;
    cfg.temperature_decay = train_t_decay;
    cfg.temperature_floor = train_t_floor;
    cfg.use_baseline = train_baseline;
    cfg.seed = train_seed;
    const PolicyParams params = train(instances, cfg);
    save_policy(params, train_out);
    std::cerr << "wrote policy to " << train_out << "\n";
    return 0;
  }

  if (run_cmd->parsed()) {
    const auto instances = load_instances(run_instances_path);
    if (instances.empty()) throw UsageError("instance file is empty");

    std::unique_ptr<PolicyParams> policy;
    std::vector<AlgoSpec> specs;
    for (const auto& name : run_algos) {
      AlgoSpec spec;
      spec.kind = algo_kind_from_name(name);
      spec.rho = run_rho;
      spec.budget_b = run_b;
      if (spec.kind == AlgoKind::kLomar || spec.kind == AlgoKind::kDrl ||
          spec.kind == AlgoKind::kDrlOs) {
        if (run_policy_path.empty()) {
          throw UsageError("--policy is required for " + name);
        }
        if (!policy) policy = std::make_unique<PolicyParams>(load_policy(run_policy_path));
        spec.policy = policy.get();
      }
      specs.push_back(std::move(spec));
    }
    const EvalReport report =
        evaluate(instances, specs, parse_setting(run_setting), parse_expert(run_expert),
                 run_seed, run_cr_vs == "expert" ? CrReference::kExpert : CrReference::kOpt);
    write_file(run_out, report_to_json(report));
    std::cerr << "wrote report to " << run_out << "\n";
    return 0;
  }

  if (report_cmd->parsed()) {
    std::ifstream in(report_in);
    if (!in) throw ParseError("cannot open: " + report_in);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const EvalReport report = report_from_json(text);
    std::ofstream out(report_out, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + report_out);
    render_report(report, report_format, out);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const matchlab::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const matchlab::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const matchlab::InternalInvariantError& e) {
    std::cerr << "internal invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const matchlab::CapacityError& e) {
    std::cerr << "internal capacity violation: " << e.what() << "\n";
    return 3;
  } catch (const matchlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
