#include "nlspec/grid.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "nlspec/error.hpp"

namespace nlspec {

BoundaryMode parse_boundary_mode(std::string_view name) {
  if (name == "neumann") return BoundaryMode::neumann;
  if (name == "dirichlet") return BoundaryMode::dirichlet;
  throw BadParams("unknown boundary mode '" + std::string(name) + "'");
}

std::string_view to_string(BoundaryMode mode) noexcept {
  return mode == BoundaryMode::neumann ? "neumann" : "dirichlet";
}

std::shared_ptr<const WeightedGraph> build_grid_graph(const GridSpec& spec) {
  if (spec.width < 1 || spec.height < 1) throw BadParams("grid needs width, height >= 1");
  if (!(spec.h > 0.0) || !std::isfinite(spec.h)) throw BadParams("grid spacing must be > 0");

  const bool dirichlet = spec.boundary_mode == BoundaryMode::dirichlet;
  const bool one_d = spec.height == 1;
  const std::size_t pad_x = dirichlet ? 1 : 0;
  const std::size_t pad_y = (dirichlet && !one_d) ? 1 : 0;
  const std::size_t W = spec.width + 2 * pad_x;
  const std::size_t H = spec.height + 2 * pad_y;
  const double w = 1.0 / spec.h;
  const double cell = std::pow(spec.h, static_cast<double>(spec.dimension()));

  auto index = [W](std::size_t x, std::size_t y) { return y * W + x; };
  auto interior = [&](std::size_t x, std::size_t y) {
    return x >= pad_x && x < pad_x + spec.width && y >= pad_y && y < pad_y + spec.height;
  };

  std::vector<Edge> edges;
  std::vector<std::size_t> boundary;
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      if (!interior(x, y)) {
        boundary.push_back(index(x, y));
        continue;
      }
      // Edges from each interior cell to its right/down neighbours, plus the
      // left/up neighbours when those are boundary nodes.
      if (x + 1 < W) edges.push_back({index(x, y), index(x + 1, y), w});
      if (y + 1 < H) edges.push_back({index(x, y), index(x, y + 1), w});
      if (x > 0 && !interior(x - 1, y)) edges.push_back({index(x - 1, y), index(x, y), w});
      if (y > 0 && !interior(x, y - 1)) edges.push_back({index(x, y - 1), index(x, y), w});
    }
  }
  auto g = std::make_shared<WeightedGraph>(W * H, std::move(edges), std::move(boundary),
                                           std::vector<double>(W * H, cell));
  g->set_layout({W, H});
  return g;
}

std::shared_ptr<const WeightedGraph> path_graph(std::size_t n, double weight) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, weight});
  return std::make_shared<const WeightedGraph>(n, std::move(edges));
}

}  // namespace nlspec
