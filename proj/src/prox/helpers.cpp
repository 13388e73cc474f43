#include <algorithm>
#include <numeric>

#include "internal.hpp"

namespace nlspec::detail {

void edge_difference(const WeightedGraph& g, const Signal& u, std::vector<double>& out) {
  const auto& edges = g.edges();
  out.resize(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) out[k] = u[edges[k].j] - u[edges[k].i];
}

void edge_adjoint(const WeightedGraph& g, std::span<const double> phi, Signal& out) {
  const auto& edges = g.edges();
  out = Signal(g.node_count());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    out[edges[k].j] += phi[k];
    out[edges[k].i] -= phi[k];
  }
}

void zero_dirichlet(const WeightedGraph* g, Signal& u) {
  if (!g) return;
  for (std::size_t b : g->boundary()) u[b] = 0.0;
}

double l1_threshold(std::span<const double> y, std::span<const double> a, double r) {
  const std::size_t n = y.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += a[i] * std::abs(y[i]);
  if (total <= r) return 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return std::abs(y[i]) > std::abs(y[j]); });
  double weight = 0.0;
  double weighted = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    weight += a[i];
    weighted += a[i] * std::abs(y[i]);
    const double theta = (weighted - r) / weight;
    const double next = k + 1 < n ? std::abs(y[order[k + 1]]) : 0.0;
    if (theta >= next) return std::max(theta, 0.0);
  }
  return 0.0;
}

void project_l1_ball(std::vector<double>& x, double radius) {
  const std::vector<double> ones(x.size(), 1.0);
  const double theta = l1_threshold(x, ones, radius);
  if (theta == 0.0) return;
  for (double& v : x) v = v > 0.0 ? std::max(v - theta, 0.0) : std::min(v + theta, 0.0);
}

}  // namespace nlspec::detail
