#include "flow_network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace nlspec::detail {

namespace {

// Collapses Dirichlet nodes into one node (index returned in `sink_node`)
// and enforces the zero-sum condition. Returns false when it fails.
struct Reduced {
  std::vector<std::size_t> map;  // graph node -> reduced node
  std::vector<double> supply;    // per reduced node
  std::size_t nodes = 0;
};

bool reduce(const WeightedGraph& g, std::vector<double> s, double tol, Reduced& out) {
  const std::size_t n = g.node_count();
  out.map.assign(n, 0);
  std::size_t next = 0;
  const bool dirichlet = g.has_boundary();
  const std::size_t bnode = dirichlet ? 0 : std::numeric_limits<std::size_t>::max();
  if (dirichlet) next = 1;
  for (std::size_t i = 0; i < n; ++i) out.map[i] = g.is_boundary(i) ? bnode : next++;
  out.nodes = next;
  out.supply.assign(next, 0.0);

  double total = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (g.is_boundary(i)) continue;
    total += s[i];
    mass += std::abs(s[i]);
  }
  if (dirichlet) {
    for (std::size_t i = 0; i < n; ++i)
      if (!g.is_boundary(i)) out.supply[out.map[i]] = s[i];
    out.supply[0] = -total;
    return true;
  }
  if (std::abs(total) > std::max(tol, 1e-12) * mass + 1e-300) return false;
  const auto m = g.node_measure();
  double msum = 0.0;
  for (double v : m) msum += v;
  for (std::size_t i = 0; i < n; ++i) out.supply[out.map[i]] = s[i] - total * m[i] / msum;
  return true;
}

struct Arc {
  std::size_t to;
  double cap;
  std::size_t rev;
};

class MaxFlow {
public:
  explicit MaxFlow(std::size_t n) : adj_(n) {}

  void add_undirected(std::size_t a, std::size_t b, double cap) {
    adj_[a].push_back({b, cap, adj_[b].size()});
    adj_[b].push_back({a, cap, adj_[a].size() - 1});
  }
  void add_directed(std::size_t a, std::size_t b, double cap) {
    adj_[a].push_back({b, cap, adj_[b].size()});
    adj_[b].push_back({a, 0.0, adj_[a].size() - 1});
  }

  double run(std::size_t s, std::size_t t, double eps) {
    double total = 0.0;
    const std::size_t n = adj_.size();
    std::vector<std::pair<std::size_t, std::size_t>> parent(n);
    for (;;) {
      std::vector<char> seen(n, 0);
      std::deque<std::size_t> queue{s};
      seen[s] = 1;
      while (!queue.empty() && !seen[t]) {
        const std::size_t v = queue.front();
        queue.pop_front();
        for (std::size_t k = 0; k < adj_[v].size(); ++k) {
          const Arc& a = adj_[v][k];
          if (a.cap > eps && !seen[a.to]) {
            seen[a.to] = 1;
            parent[a.to] = {v, k};
            queue.push_back(a.to);
          }
        }
      }
      if (!seen[t]) return total;
      double push = std::numeric_limits<double>::infinity();
      for (std::size_t v = t; v != s; v = parent[v].first) push = std::min(push, adj_[parent[v].first][parent[v].second].cap);
      for (std::size_t v = t; v != s; v = parent[v].first) {
        Arc& a = adj_[parent[v].first][parent[v].second];
        a.cap -= push;
        adj_[a.to][a.rev].cap += push;
      }
      total += push;
    }
  }

private:
  std::vector<std::vector<Arc>> adj_;
};

}  // namespace

bool capacity_flow_feasible(const WeightedGraph& g, std::vector<double> supply, double radius, double tol) {
  Reduced r;
  if (!reduce(g, std::move(supply), tol, r)) return false;
  const std::size_t S = r.nodes;
  const std::size_t T = r.nodes + 1;
  MaxFlow net(r.nodes + 2);
  double maxcap = 0.0;
  for (const Edge& e : g.edges()) {
    const std::size_t a = r.map[e.i];
    const std::size_t b = r.map[e.j];
    if (a == b) continue;
    net.add_undirected(a, b, radius * e.w);
    maxcap = std::max(maxcap, radius * e.w);
  }
  double demand = 0.0;
  double mass = 0.0;
  for (std::size_t v = 0; v < r.nodes; ++v) {
    const double s = r.supply[v];
    mass += std::abs(s);
    // positive supply = net inflow needed: the node drains into T
    if (s > 0.0) {
      net.add_directed(v, T, s);
      demand += s;
    } else if (s < 0.0) {
      net.add_directed(S, v, -s);
    }
  }
  if (demand == 0.0) return true;
  const double flow = net.run(S, T, 1e-15 * std::max(maxcap, mass));
  return flow >= demand - 1e-12 * mass;
}

double transport_cost(const WeightedGraph& g, std::vector<double> supply, double tol) {
  Reduced r;
  if (!reduce(g, std::move(supply), tol, r)) return std::numeric_limits<double>::infinity();

  struct UEdge {
    std::size_t a, b;
    double len;
    double flow = 0.0;  // positive: a -> b
  };
  std::vector<UEdge> edges;
  std::vector<std::vector<std::size_t>> incident(r.nodes);
  for (const Edge& e : g.edges()) {
    const std::size_t a = r.map[e.i];
    const std::size_t b = r.map[e.j];
    if (a == b) continue;
    incident[a].push_back(edges.size());
    incident[b].push_back(edges.size());
    edges.push_back({a, b, 1.0 / e.w});
  }

  // excess > 0: must send flow out (negative supply is an outflow).
  std::vector<double> excess(r.nodes);
  double mass = 0.0;
  for (std::size_t v = 0; v < r.nodes; ++v) {
    excess[v] = -r.supply[v];
    mass += std::abs(excess[v]);
  }
  const double eps = 1e-14 * std::max(mass, 1e-300);
  const double inf = std::numeric_limits<double>::infinity();

  // cost and residual capacity of moving flow from `from` along edge k
  auto arc = [&](std::size_t k, std::size_t from, double& cost, double& cap) {
    const UEdge& e = edges[k];
    const double dir_flow = from == e.a ? e.flow : -e.flow;
    if (dir_flow < -eps) {
      cost = -e.len;
      cap = -dir_flow;
    } else {
      cost = e.len;
      cap = inf;
    }
  };

  for (std::size_t guard = 0; guard < 4 * (r.nodes + edges.size()) + 16; ++guard) {
    bool any = false;
    for (double x : excess)
      if (x > eps) any = true;
    if (!any) break;

    std::vector<double> dist(r.nodes, inf);
    std::vector<std::size_t> pred_edge(r.nodes, edges.size());
    std::vector<std::size_t> pred_node(r.nodes, r.nodes);
    for (std::size_t v = 0; v < r.nodes; ++v)
      if (excess[v] > eps) dist[v] = 0.0;
    for (std::size_t pass = 0; pass < r.nodes; ++pass) {
      bool changed = false;
      for (std::size_t v = 0; v < r.nodes; ++v) {
        if (dist[v] == inf) continue;
        for (std::size_t k : incident[v]) {
          const std::size_t w = edges[k].a == v ? edges[k].b : edges[k].a;
          double cost, cap;
          arc(k, v, cost, cap);
          if (dist[v] + cost < dist[w] - 1e-15 * std::abs(dist[w])) {
            dist[w] = dist[v] + cost;
            pred_edge[w] = k;
            pred_node[w] = v;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    std::size_t sink = r.nodes;
    for (std::size_t v = 0; v < r.nodes; ++v)
      if (excess[v] < -eps && dist[v] < inf && (sink == r.nodes || dist[v] < dist[sink])) sink = v;
    if (sink == r.nodes) break;

    double push = -excess[sink];
    std::size_t v = sink;
    std::size_t steps = 0;
    while (pred_node[v] != r.nodes && steps++ <= r.nodes) {
      double cost, cap;
      arc(pred_edge[v], pred_node[v], cost, cap);
      push = std::min(push, cap);
      v = pred_node[v];
    }
    push = std::min(push, excess[v]);
    const std::size_t source = v;
    v = sink;
    steps = 0;
    while (pred_node[v] != r.nodes && steps++ <= r.nodes) {
      UEdge& e = edges[pred_edge[v]];
      if (pred_node[v] == e.a) e.flow += push;
      else e.flow -= push;
      v = pred_node[v];
    }
    excess[source] -= push;
    excess[sink] += push;
  }

  double cost = 0.0;
  for (const UEdge& e : edges) cost += std::abs(e.flow) * e.len;
  for (double x : excess)
    if (std::abs(x) > 1e-9 * std::max(mass, 1e-300)) return inf;
  return cost;
}

}  // namespace nlspec::detail
