// Python bindings for the matchlab core. Decisions cross the boundary as
// plain ints with -1 meaning skip, mirroring the JSONL report encoding.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>
#include <optional>
#include <stdexcept>

#include "matchlab/errors.hpp"
#include "matchlab/harness.hpp"
#include "matchlab/instance.hpp"
#include "matchlab/oracle.hpp"
#include "matchlab/policy.hpp"
#include "matchlab/switching.hpp"

namespace py = pybind11;
using namespace matchlab;

namespace {

Setting setting_from_string(const std::string& s) {
  if (s == "nfd") return Setting::kNoFreeDisposal;
  if (s == "fd") return Setting::kFreeDisposal;
  throw UsageError("unknown setting: " + s);
}

ExpertKind expert_from_string(const std::string& s) {
  if (s == "greedy") return ExpertKind::kGreedy;
  if (s == "osm") return ExpertKind::kOsm;
  throw UsageError("unknown expert: " + s);
}

int decision_to_int(const Decision& d) { return d.is_skip() ? -1 : d.index(); }

py::dict trace_to_dict(const RunTrace& trace) {
  py::list proposed, expert, actual, rewards, expert_rewards, slack;
  for (const auto& step : trace.steps) {
    proposed.append(decision_to_int(step.proposed));
    expert.append(decision_to_int(step.expert));
    actual.append(decision_to_int(step.actual));
    rewards.append(step.reward);
    expert_rewards.append(step.expert_reward);
    slack.append(step.slack);
  }
  py::dict out;
  out["proposed"] = proposed;
  out["expert"] = expert;
  out["actual"] = actual;
  out["rewards"] = rewards;
  out["expert_rewards"] = expert_rewards;
  out["slack"] = slack;
  out["final_reward"] = trace.final_reward;
  out["final_expert_reward"] = trace.final_expert_reward;
  return out;
}

}  // namespace

PYBIND11_MODULE(_matchlab, m) {
  m.doc() = "Edge-weighted online bipartite matching with robust expert/RL switching";

  py::register_exception<UsageError>(m, "MatchlabUsageError", PyExc_ValueError);
  py::register_exception<Error>(m, "MatchlabError", PyExc_RuntimeError);

  m.attr("UNBOUNDED") = std::numeric_limits<double>::infinity();
  m.attr("FEATURE_DIM") = kFeatureDim;

  py::class_<ProblemInstance>(m, "ProblemInstance")
      .def(py::init<>())
      .def_readwrite("num_offline", &ProblemInstance::num_offline)
      .def_readwrite("capacities", &ProblemInstance::capacities)
      .def_readwrite("weight_caps", &ProblemInstance::weight_caps)
      .def_readwrite("arrivals", &ProblemInstance::arrivals)
      .def_property_readonly("num_online", &ProblemInstance::num_online)
      .def("__eq__", [](const ProblemInstance& a, const ProblemInstance& b) { return a == b; })
      .def("__repr__", [](const ProblemInstance& inst) {
        return "<ProblemInstance " + std::to_string(inst.num_offline) + "x" +
               std::to_string(inst.num_online()) + ">";
      });

  m.def(
      "generate_instance",
      [](int num_offline, int num_online, std::uint64_t seed, int capacity_low,
         int capacity_high, double weight_low, double weight_high, double sparsity) {
        GeneratorConfig config;
        config.num_offline = num_offline;
        config.num_online = num_online;
        config.seed = seed;
        config.capacity_low = capacity_low;
        config.capacity_high = capacity_high;
        config.weight_low = weight_low;
        config.weight_high = weight_high;
        config.sparsity = sparsity;
        return generate_instance(config);
      },
      py::arg("num_offline"), py::arg("num_online"), py::arg("seed") = 0,
      py::arg("capacity_low") = 1, py::arg("capacity_high") = 1,
      py::arg("weight_low") = 0.0, py::arg("weight_high") = 1.0,
      py::arg("sparsity") = 0.0);

  m.def("validate", &validate, py::arg("instance"));
  m.def("save_instances",
        py::overload_cast<const std::vector<ProblemInstance>&, const std::string&>(
            &save_instances),
        py::arg("instances"), py::arg("path"));
  m.def("load_instances",
        py::overload_cast<const std::string&>(&load_instances), py::arg("path"));

  m.def("top_set",
        [](const std::vector<double>& multiset, int capacity) {
          return top_set(multiset, capacity);
        },
        py::arg("multiset"), py::arg("capacity"));
  m.def("f_value",
        [](const std::vector<double>& multiset, int capacity) {
          return f_value(multiset, capacity);
        },
        py::arg("multiset"), py::arg("capacity"));
  m.def("delta_f",
        [](const std::vector<double>& multiset, int capacity, double w) {
          return delta_f(multiset, capacity, w);
        },
        py::arg("multiset"), py::arg("capacity"), py::arg("w"));
  m.def("p_os", &p_os, py::arg("r_diff"), py::arg("temperature"));
  m.def("osm_phase_length", &osm_phase_length, py::arg("num_online"));

  m.def(
      "opt_exhaustive",
      [](const ProblemInstance& instance) {
        const auto result = opt_exhaustive(instance);
        std::vector<int> assignment;
        for (const auto& d : result.assignment) assignment.push_back(decision_to_int(d));
        return py::make_tuple(result.value, assignment);
      },
      py::arg("instance"));
  m.def(
      "opt_flow",
      [](const ProblemInstance& instance) {
        const auto result = opt_flow(instance);
        std::vector<int> assignment;
        for (const auto& d : result.assignment) assignment.push_back(decision_to_int(d));
        return py::make_tuple(result.value, assignment);
      },
      py::arg("instance"));

  py::class_<PolicyParams>(m, "PolicyParams")
      .def_readonly("dims", &PolicyParams::dims)
      .def_readonly("activation", &PolicyParams::activation)
      .def_readonly("feature_spec_version", &PolicyParams::feature_spec_version)
      .def("parameter_count", &PolicyParams::parameter_count);

  m.def("init_policy",
        [](const std::vector<int>& dims, std::uint64_t seed) {
          return init_policy(dims, seed);
        },
        py::arg("dims"), py::arg("seed"));
  m.def("save_policy", &save_policy, py::arg("policy"), py::arg("path"));
  m.def("load_policy", &load_policy, py::arg("path"));

  m.def(
      "run_expert",
      [](const ProblemInstance& instance, const std::string& expert,
         const std::string& setting) {
        return trace_to_dict(
            run_expert_alone(instance, expert_from_string(expert),
                             setting_from_string(setting)));
      },
      py::arg("instance"), py::arg("expert") = "greedy", py::arg("setting") = "nfd");

  m.def(
      "run_lomar",
      [](const ProblemInstance& instance, const PolicyParams& policy, double rho,
         double budget_b, const std::string& setting, const std::string& expert) {
        PolicyProposer proposer(policy);
        const SwitchConfig cfg{rho, budget_b, setting_from_string(setting)};
        return trace_to_dict(
            run_episode(instance, proposer, expert_from_string(expert), cfg));
      },
      py::arg("instance"), py::arg("policy"), py::arg("rho"), py::arg("budget_b") = 0.0,
      py::arg("setting") = "nfd", py::arg("expert") = "greedy");

  m.def(
      "run_scripted",
      [](const ProblemInstance& instance, const std::vector<int>& script, double rho,
         double budget_b, const std::string& setting, const std::string& expert) {
        std::vector<Decision> decisions;
        for (int u : script) {
          decisions.push_back(u < 0 ? Decision::skip() : Decision::assign(u));
        }
        ScriptedProposer proposer(std::move(decisions));
        const SwitchConfig cfg{rho, budget_b, setting_from_string(setting)};
        return trace_to_dict(
            run_episode(instance, proposer, expert_from_string(expert), cfg));
      },
      py::arg("instance"), py::arg("script"), py::arg("rho"), py::arg("budget_b") = 0.0,
      py::arg("setting") = "nfd", py::arg("expert") = "greedy");

  m.def(
      "train",
      [](const std::vector<ProblemInstance>& instances, int epochs, int batch_size,
         double learning_rate, double rho, double budget_b, const std::string& setting,
         const std::string& expert, double t0, double t_decay, double t_floor,
         bool baseline, std::uint64_t seed) {
        TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.batch_size = batch_size;
        cfg.learning_rate = learning_rate;
        cfg.rho = rho;
        cfg.budget_b = budget_b;
        cfg.setting = setting_from_string(setting);
        cfg.expert = expert_from_string(expert);
        cfg.temperature_start = t0;
        cfg.temperature_decay = t_decay;
        cfg.temperature_floor = t_floor;
        cfg.use_baseline = baseline;
        cfg.seed = seed;
        return train(instances, cfg);
      },
      py::arg("instances"), py::arg("epochs"), py::arg("batch_size") = 100,
      py::arg("learning_rate") = 1e-3, py::arg("rho") = 0.0, py::arg("budget_b") = 0.0,
      py::arg("setting") = "nfd", py::arg("expert") = "greedy", py::arg("t0") = 1.0,
      py::arg("t_decay") = 0.99, py::arg("t_floor") = 0.05, py::arg("baseline") = false,
      py::arg("seed") = 0);

  m.def(
      "evaluate",
      [](const std::vector<ProblemInstance>& instances,
         const std::vector<py::dict>& algo_specs, const std::string& setting,
         const std::string& expert, std::uint64_t seed, const std::string& cr_vs) {
        // Policies referenced by the specs must outlive evaluate().
        std::vector<std::unique_ptr<PolicyParams>> owned;
        std::vector<AlgoSpec> specs;
        for (const auto& d : algo_specs) {
          AlgoSpec spec;
          spec.kind = algo_kind_from_name(d["algo"].cast<std::string>());
          if (d.contains("label")) spec.label = d["label"].cast<std::string>();
          if (d.contains("rho")) spec.rho = d["rho"].cast<double>();
          if (d.contains("b")) spec.budget_b = d["b"].cast<double>();
          if (d.contains("policy")) {
            owned.push_back(
                std::make_unique<PolicyParams>(d["policy"].cast<PolicyParams>()));
            spec.policy = owned.back().get();
          }
          specs.push_back(std::move(spec));
        }
        const auto report = evaluate(
            instances, specs, setting_from_string(setting), expert_from_string(expert),
            seed, cr_vs == "expert" ? CrReference::kExpert : CrReference::kOpt);
        return report_to_json(report);
      },
      py::arg("instances"), py::arg("algo_specs"), py::arg("setting") = "nfd",
      py::arg("expert") = "greedy", py::arg("seed") = 0, py::arg("cr_vs") = "opt");
}
