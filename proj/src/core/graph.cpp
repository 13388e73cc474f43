#include "nlspec/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>

#include "nlspec/error.hpp"

namespace nlspec {

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

WeightedGraph::WeightedGraph(std::size_t n, std::vector<Edge> edges, std::vector<std::size_t> boundary,
                             std::vector<double> node_measure)
    : n_(n), edges_(std::move(edges)), boundary_(std::move(boundary)), measure_(std::move(node_measure)) {
  if (n_ == 0) throw InvalidGraph("graph needs at least one node");

  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (Edge& e : edges_) {
    if (e.i >= n_ || e.j >= n_) throw InvalidGraph("edge endpoint out of range");
    if (e.i == e.j) throw InvalidGraph("self-loop at node " + std::to_string(e.i));
    if (!(e.w > 0.0) || !std::isfinite(e.w)) throw InvalidGraph("edge weights must be finite and > 0");
    if (e.i > e.j) std::swap(e.i, e.j);
    if (!seen.emplace(e.i, e.j).second)
      throw InvalidGraph("duplicate edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) + ")");
  }

  std::sort(boundary_.begin(), boundary_.end());
  boundary_.erase(std::unique(boundary_.begin(), boundary_.end()), boundary_.end());
  is_boundary_.assign(n_, 0);
  for (std::size_t b : boundary_) {
    if (b >= n_) throw InvalidGraph("boundary node out of range");
    is_boundary_[b] = 1;
  }
  if (measure_.empty()) measure_.assign(n_, 1.0);
  if (measure_.size() != n_) throw InvalidGraph("node_measure length differs from node count");
  for (double m : measure_)
    if (!(m > 0.0) || !std::isfinite(m)) throw InvalidGraph("node measure must be finite and > 0");

  // Connectivity after contracting the Dirichlet set into one node.
  std::vector<std::size_t> parent(n_);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto unite = [&](std::size_t a, std::size_t b) { parent[find_root(parent, a)] = find_root(parent, b); };
  for (std::size_t k = 1; k < boundary_.size(); ++k) unite(boundary_[0], boundary_[k]);
  for (const Edge& e : edges_) unite(e.i, e.j);
  const std::size_t root = find_root(parent, 0);
  for (std::size_t v = 1; v < n_; ++v)
    if (find_root(parent, v) != root) throw InvalidGraph("graph is not connected (node " + std::to_string(v) + ")");

  std::vector<std::size_t> degree(n_, 0);
  for (const Edge& e : edges_) {
    ++degree[e.i];
    ++degree[e.j];
  }
  adj_offset_.assign(n_ + 1, 0);
  for (std::size_t v = 0; v < n_; ++v) adj_offset_[v + 1] = adj_offset_[v] + degree[v];
  adj_.resize(adj_offset_[n_]);
  std::vector<std::size_t> fill(adj_offset_.begin(), adj_offset_.end() - 1);
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    adj_[fill[edges_[k].i]++] = {edges_[k].j, k};
    adj_[fill[edges_[k].j]++] = {edges_[k].i, k};
  }
}

std::span<const WeightedGraph::Neighbor> WeightedGraph::neighbors(std::size_t node) const noexcept {
  return {adj_.data() + adj_offset_[node], adj_offset_[node + 1] - adj_offset_[node]};
}

void WeightedGraph::set_layout(GridLayout layout) {
  if (layout.width * layout.height != n_) throw InvalidGraph("layout does not cover the node set");
  layout_ = layout;
}

}  // namespace nlspec
