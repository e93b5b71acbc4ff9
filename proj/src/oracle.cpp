#include "matchlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "matchlab/errors.hpp"

namespace matchlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCostEps = 1e-12;
}  // namespace

OptResult opt_exhaustive(const ProblemInstance& instance) {
  const int num_u = instance.num_offline;
  const int num_v = instance.num_online();
  // (|U|+1)^|V| states; checked in log space to avoid overflow.
  if (static_cast<double>(num_v) * std::log(static_cast<double>(num_u) + 1.0) >
      std::log(1e7) + 1e-12) {
    throw SizeError("instance too large for exhaustive search");
  }

  // Upper bound on what arrivals v.. can still add: sum of row maxima.
  std::vector<double> suffix(static_cast<std::size_t>(num_v) + 1, 0.0);
  for (int v = num_v - 1; v >= 0; --v) {
    double row_max = 0.0;
    for (double w : instance.arrivals[static_cast<std::size_t>(v)]) {
      row_max = std::max(row_max, w);
    }
    suffix[static_cast<std::size_t>(v)] = suffix[static_cast<std::size_t>(v) + 1] + row_max;
  }

  std::vector<int> remaining = instance.capacities;
  std::vector<Decision> current(static_cast<std::size_t>(num_v), Decision::skip());
  OptResult best;
  best.value = -kInf;

  auto dfs = [&](auto&& self, int v, double value) -> void {
    if (value + suffix[static_cast<std::size_t>(v)] <= best.value) return;
    if (v == num_v) {
      if (value > best.value) {
        best.value = value;
        best.assignment = current;
      }
      return;
    }
    const auto& row = instance.arrivals[static_cast<std::size_t>(v)];
    for (int u = 0; u < num_u; ++u) {
      if (remaining[static_cast<std::size_t>(u)] == 0) continue;
      --remaining[static_cast<std::size_t>(u)];
      current[static_cast<std::size_t>(v)] = Decision::assign(u);
      self(self, v + 1, value + row[static_cast<std::size_t>(u)]);
      ++remaining[static_cast<std::size_t>(u)];
    }
    current[static_cast<std::size_t>(v)] = Decision::skip();
    self(self, v + 1, value);
  };
  dfs(dfs, 0, 0.0);
  return best;
}

namespace {

struct FlowEdge {
  int to;
  int rev;        // index of the reverse edge in graph[to]
  int capacity;   // residual
  double cost;
};

class FlowGraph {
 public:
  explicit FlowGraph(int n) : adj_(static_cast<std::size_t>(n)) {}

  void add_edge(int from, int to, int capacity, double cost) {
    adj_[static_cast<std::size_t>(from)].push_back(
        {to, static_cast<int>(adj_[static_cast<std::size_t>(to)].size()), capacity, cost});
    adj_[static_cast<std::size_t>(to)].push_back(
        {from, static_cast<int>(adj_[static_cast<std::size_t>(from)].size()) - 1, 0, -cost});
  }

  std::vector<std::vector<FlowEdge>>& adj() { return adj_; }
  int size() const { return static_cast<int>(adj_.size()); }

 private:
  std::vector<std::vector<FlowEdge>> adj_;
};

}  // namespace

OptResult opt_flow(const ProblemInstance& instance) {
  const int num_u = instance.num_offline;
  const int num_v = instance.num_online();
  const int source = 0;
  const int sink = 1 + num_v + num_u;
  const auto online_node = [](int v) { return 1 + v; };
  const auto offline_node = [num_v](int u) { return 1 + num_v + u; };

  FlowGraph graph(sink + 1);
  for (int v = 0; v < num_v; ++v) graph.add_edge(source, online_node(v), 1, 0.0);
  for (int v = 0; v < num_v; ++v) {
    const auto& row = instance.arrivals[static_cast<std::size_t>(v)];
    for (int u = 0; u < num_u; ++u) {
      graph.add_edge(online_node(v), offline_node(u), 1, -row[static_cast<std::size_t>(u)]);
    }
  }
  for (int u = 0; u < num_u; ++u) {
    graph.add_edge(offline_node(u), sink, instance.capacities[static_cast<std::size_t>(u)], 0.0);
  }

  const int n = graph.size();
  // Initial potentials: one relaxation sweep in topological order
  // (source -> online -> offline -> sink) covers every forward arc.
  std::vector<double> potential(static_cast<std::size_t>(n), 0.0);
  for (int node = 0; node < n; ++node) {
    for (const auto& e : graph.adj()[static_cast<std::size_t>(node)]) {
      if (e.capacity > 0) {
        potential[static_cast<std::size_t>(e.to)] =
            std::min(potential[static_cast<std::size_t>(e.to)],
                     potential[static_cast<std::size_t>(node)] + e.cost);
      }
    }
  }

  double total_cost = 0.0;
  std::vector<double> dist(static_cast<std::size_t>(n));
  std::vector<int> prev_node(static_cast<std::size_t>(n));
  std::vector<int> prev_edge(static_cast<std::size_t>(n));

  while (true) {
    std::fill(dist.begin(), dist.end(), kInf);
    dist[static_cast<std::size_t>(source)] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
      const auto [d, node] = heap.top();
      heap.pop();
      if (d > dist[static_cast<std::size_t>(node)] + kCostEps) continue;
      const auto& edges = graph.adj()[static_cast<std::size_t>(node)];
      for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        if (e.capacity <= 0) continue;
        const double reduced = std::max(
            0.0, e.cost + potential[static_cast<std::size_t>(node)] -
                     potential[static_cast<std::size_t>(e.to)]);
        const double nd = d + reduced;
        if (nd + kCostEps < dist[static_cast<std::size_t>(e.to)]) {
          dist[static_cast<std::size_t>(e.to)] = nd;
          prev_node[static_cast<std::size_t>(e.to)] = node;
          prev_edge[static_cast<std::size_t>(e.to)] = static_cast<int>(i);
          heap.emplace(nd, e.to);
        }
      }
    }
    if (dist[static_cast<std::size_t>(sink)] == kInf) break;

    const double path_cost = dist[static_cast<std::size_t>(sink)] +
                             potential[static_cast<std::size_t>(sink)] -
                             potential[static_cast<std::size_t>(source)];
    if (path_cost >= -kCostEps) break;

    for (int node = 0; node < n; ++node) {
      if (dist[static_cast<std::size_t>(node)] < kInf) {
        potential[static_cast<std::size_t>(node)] += dist[static_cast<std::size_t>(node)];
      }
    }
    // All arc capacities on a source->sink path admit one unit.
    for (int node = sink; node != source; node = prev_node[static_cast<std::size_t>(node)]) {
      auto& e = graph.adj()[static_cast<std::size_t>(
          prev_node[static_cast<std::size_t>(node)])][static_cast<std::size_t>(
          prev_edge[static_cast<std::size_t>(node)])];
      e.capacity -= 1;
      graph.adj()[static_cast<std::size_t>(node)][static_cast<std::size_t>(e.rev)].capacity += 1;
    }
    total_cost += path_cost;
  }

  OptResult result;
  result.value = -total_cost;
  result.assignment.assign(static_cast<std::size_t>(num_v), Decision::skip());
  for (int v = 0; v < num_v; ++v) {
    for (const auto& e : graph.adj()[static_cast<std::size_t>(online_node(v))]) {
      // A used online->offline arc has residual 0 and a positive reverse.
      if (e.to >= offline_node(0) && e.to < offline_node(num_u) && e.capacity == 0) {
        result.assignment[static_cast<std::size_t>(v)] =
            Decision::assign(e.to - offline_node(0));
        break;
      }
    }
  }
  return result;
}

}  // namespace matchlab
