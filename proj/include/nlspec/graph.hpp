#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace nlspec {

struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  double w = 1.0;
};

/// Row-major rectangular arrangement of the nodes, used for image output.
struct GridLayout {
  std::size_t width = 0;
  std::size_t height = 0;
};

/// Undirected weighted graph with an optional set of Dirichlet nodes.
///
/// Construction normalises every edge to i < j and rejects self-loops,
/// duplicates, non-positive weights and non-positive node measures. The graph
/// obtained by contracting all Dirichlet nodes into a single node must be
/// connected; isolated Dirichlet nodes (grid corners) are therefore allowed.
class WeightedGraph {
public:
  struct Neighbor {
    std::size_t node;
    std::size_t edge;
  };

  WeightedGraph(std::size_t n, std::vector<Edge> edges, std::vector<std::size_t> boundary = {},
                std::vector<double> node_measure = {});

  std::size_t node_count() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::size_t>& boundary() const noexcept { return boundary_; }
  bool has_boundary() const noexcept { return !boundary_.empty(); }
  bool is_boundary(std::size_t node) const noexcept { return is_boundary_[node] != 0; }
  std::span<const double> node_measure() const noexcept { return measure_; }
  std::span<const Neighbor> neighbors(std::size_t node) const noexcept;

  const std::optional<GridLayout>& layout() const noexcept { return layout_; }
  void set_layout(GridLayout layout);

private:
  std::size_t n_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> boundary_;
  std::vector<char> is_boundary_;
  std::vector<double> measure_;
  std::vector<std::size_t> adj_offset_;
  std::vector<Neighbor> adj_;
  std::optional<GridLayout> layout_;
};

}  // namespace nlspec
