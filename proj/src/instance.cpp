#include "matchlab/instance.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "matchlab/errors.hpp"
#include "matchlab/rng.hpp"

namespace matchlab {

using nlohmann::json;

namespace {

void check_config(const GeneratorConfig& c) {
  if (c.num_offline < 1) throw ConfigError("num_offline must be >= 1");
  if (c.num_online < 0) throw ConfigError("num_online must be >= 0");
  if (c.capacity_low < 1) throw ConfigError("capacity_low must be >= 1");
  if (c.capacity_high < c.capacity_low)
    throw ConfigError("capacity_high must be >= capacity_low");
  if (!(c.weight_low >= 0.0)) throw ConfigError("weight_low must be >= 0");
  if (!(c.weight_high >= c.weight_low))
    throw ConfigError("weight_high must be >= weight_low");
  if (!(c.sparsity >= 0.0 && c.sparsity <= 1.0))
    throw ConfigError("sparsity must be in [0, 1]");
}

}  // namespace

ProblemInstance generate_instance(const GeneratorConfig& config) {
  check_config(config);
  SplitMix64 rng(config.seed);

  ProblemInstance inst;
  inst.num_offline = config.num_offline;
  inst.capacities.reserve(config.num_offline);
  const std::uint64_t span =
      static_cast<std::uint64_t>(config.capacity_high - config.capacity_low) + 1;
  for (int u = 0; u < config.num_offline; ++u) {
    inst.capacities.push_back(config.capacity_low +
                              static_cast<int>(rng.next_below(span)));
  }
  inst.weight_caps.assign(config.num_offline, config.weight_high);

  inst.arrivals.resize(config.num_online);
  for (int v = 0; v < config.num_online; ++v) {
    auto& row = inst.arrivals[v];
    row.reserve(config.num_offline);
    for (int u = 0; u < config.num_offline; ++u) {
      const double coin = rng.next_double();
      const double w = rng.uniform(config.weight_low, config.weight_high);
      row.push_back(coin < config.sparsity ? 0.0 : w);
    }
  }
  return inst;
}

std::vector<std::string> validate(const ProblemInstance& inst) {
  std::vector<std::string> violations;
  auto report = [&violations](std::string msg) { violations.push_back(std::move(msg)); };

  if (inst.num_offline < 0) report("num_offline must be >= 0");
  if (static_cast<int>(inst.capacities.size()) != inst.num_offline)
    report("capacities must have length num_offline");
  if (static_cast<int>(inst.weight_caps.size()) != inst.num_offline)
    report("weight_caps must have length num_offline");

  for (std::size_t u = 0; u < inst.capacities.size(); ++u) {
    if (inst.capacities[u] < 1)
      report("capacity must be >= 1 at index " + std::to_string(u));
  }
  for (std::size_t u = 0; u < inst.weight_caps.size(); ++u) {
    const double cap = inst.weight_caps[u];
    if (std::isnan(cap) || cap < 0.0)
      report("weight cap must be >= 0 or unbounded at index " + std::to_string(u));
  }
  for (std::size_t v = 0; v < inst.arrivals.size(); ++v) {
    const auto& row = inst.arrivals[v];
    if (static_cast<int>(row.size()) != inst.num_offline) {
      report("arrival row " + std::to_string(v) + " must have length num_offline");
      continue;
    }
    for (std::size_t u = 0; u < row.size(); ++u) {
      const double w = row[u];
      if (!(w >= 0.0) || !std::isfinite(w)) {
        report("weight must be finite and >= 0 at (u=" + std::to_string(u) +
               ", v=" + std::to_string(v) + ")");
        continue;
      }
      if (u < inst.weight_caps.size() && std::isfinite(inst.weight_caps[u]) &&
          w > inst.weight_caps[u]) {
        report("weight " + std::to_string(w) + " exceeds cap at (u=" +
               std::to_string(u) + ", v=" + std::to_string(v) + ")");
      }
    }
  }
  return violations;
}

namespace {

nlohmann::ordered_json instance_to_json(const ProblemInstance& inst) {
  nlohmann::ordered_json caps = nlohmann::ordered_json::array();
  for (double c : inst.weight_caps) {
    if (std::isinf(c)) {
      caps.push_back(nullptr);
    } else {
      caps.push_back(c);
    }
  }
  nlohmann::ordered_json j;
  j["num_offline"] = inst.num_offline;
  j["capacities"] = inst.capacities;
  j["w_max"] = std::move(caps);
  j["arrivals"] = inst.arrivals;
  return j;
}

ProblemInstance instance_from_json(const json& j) {
  ProblemInstance inst;
  inst.num_offline = j.at("num_offline").get<int>();
  inst.capacities = j.at("capacities").get<std::vector<int>>();
  for (const auto& cap : j.at("w_max")) {
    inst.weight_caps.push_back(cap.is_null() ? kUnboundedCap : cap.get<double>());
  }
  inst.arrivals = j.at("arrivals").get<std::vector<std::vector<double>>>();
  return inst;
}

}  // namespace

void save_instances(const std::vector<ProblemInstance>& instances, std::ostream& out) {
  for (const auto& inst : instances) {
    out << instance_to_json(inst).dump() << '\n';
  }
}

void save_instances(const std::vector<ProblemInstance>& instances,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path);
  save_instances(instances, out);
}

std::vector<ProblemInstance> load_instances(std::istream& in) {
  std::vector<ProblemInstance> instances;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    ProblemInstance inst;
    try {
      inst = instance_from_json(j);
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (auto violations = validate(inst); !violations.empty()) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + violations.front());
    }
    instances.push_back(std::move(inst));
  }
  return instances;
}

std::vector<ProblemInstance> load_instances(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open: " + path);
  return load_instances(in);
}

}  // namespace matchlab
