#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "nlspec/functional.hpp"
#include "nlspec/grid.hpp"
#include "nlspec/signal.hpp"

namespace testing {

inline nlspec::Signal random_signal(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return nlspec::Signal(std::move(v));
}

inline double cosine(const nlspec::Signal& a, const nlspec::Signal& b, std::span<const double> m = {}) {
  return nlspec::dot(a, b, m) / (nlspec::norm(a, m) * nlspec::norm(b, m));
}

struct NamedFunctional {
  std::string name;
  nlspec::FunctionalHandle F;
};

/// Random small graph: a path with random weights plus optional extra chords.
inline std::shared_ptr<const nlspec::WeightedGraph> random_graph(std::size_t n, std::mt19937_64& rng,
                                                                 bool with_boundary = false) {
  std::uniform_real_distribution<double> w(0.5, 2.0);
  std::vector<nlspec::Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, w(rng)});
  if (n >= 3 && rng() % 2) edges.push_back({0, n - 1, w(rng)});
  std::vector<std::size_t> boundary;
  if (with_boundary) boundary.push_back(0);
  std::vector<double> m(n);
  for (double& x : m) x = w(rng);
  return std::make_shared<const nlspec::WeightedGraph>(n, std::move(edges), std::move(boundary), std::move(m));
}

/// Every catalog kind on a random graph with n nodes.
inline std::vector<NamedFunctional> catalog(std::size_t n, std::mt19937_64& rng, bool with_boundary = false) {
  auto g = random_graph(n, rng, with_boundary);
  std::vector<double> m(g->node_measure().begin(), g->node_measure().end());
  std::vector<NamedFunctional> out;
  out.push_back({"graph_tv", nlspec::make_graph_tv(g)});
  out.push_back({"lipschitz_sup", nlspec::make_lipschitz_sup(g)});
  out.push_back({"dirichlet_p1.5", nlspec::make_dirichlet_p(g, 1.5)});
  out.push_back({"dirichlet_p2", nlspec::make_dirichlet_p(g, 2.0)});
  out.push_back({"dirichlet_p3", nlspec::make_dirichlet_p(g, 3.0)});
  out.push_back({"l1", nlspec::make_l1(n, m)});
  out.push_back({"linf", nlspec::make_linf(n, m)});
  nlspec::FunctionalParams params;
  out.push_back({"quadratic_form", nlspec::make_functional(nlspec::FunctionalKind::quadratic_form, g, params)});
  return out;
}

}  // namespace testing
