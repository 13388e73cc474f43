#pragma once

#include <cstddef>
#include <memory>
#include <string_view>

#include "nlspec/graph.hpp"

namespace nlspec {

enum class BoundaryMode { neumann, dirichlet };

BoundaryMode parse_boundary_mode(std::string_view name);
std::string_view to_string(BoundaryMode mode) noexcept;

/// Regular 4-neighbour lattice; height == 1 is a 1-D grid.
struct GridSpec {
  std::size_t width = 1;
  std::size_t height = 1;
  double h = 1.0;
  BoundaryMode boundary_mode = BoundaryMode::neumann;

  std::size_t dimension() const noexcept { return height == 1 ? 1 : 2; }
};

/// Nodes are laid out row-major. Dirichlet mode surrounds the cells with a
/// virtual layer of clamped nodes (only along x for 1-D grids); layer
/// corners are isolated Dirichlet nodes kept so the layout stays rectangular.
/// Edge weight is 1/h (edge length h), node measure h^d.
std::shared_ptr<const WeightedGraph> build_grid_graph(const GridSpec& spec);

/// Path graph 0-1-...-(n-1) with unit weights and unit measure.
std::shared_ptr<const WeightedGraph> path_graph(std::size_t n, double weight = 1.0);

}  // namespace nlspec
