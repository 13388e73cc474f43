#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nlspec/dense.hpp"
#include "nlspec/graph.hpp"
#include "nlspec/signal.hpp"

namespace nlspec {

enum class FunctionalKind { quadratic_form, dirichlet_p, graph_tv, l1, linf, lipschitz_sup };

std::string_view to_string(FunctionalKind kind) noexcept;
FunctionalKind parse_functional_kind(std::string_view name);

/// Kind-specific construction parameters.
struct FunctionalParams {
  double exponent = 2.0;              ///< dirichlet_p only
  std::optional<DenseMatrix> matrix;  ///< quadratic_form only
  std::size_t dimension = 0;          ///< l1 / linf / quadratic_form without a graph
  std::vector<double> node_measure;   ///< used when no graph is given; empty = unit
};

/// Immutable descriptor of an absolutely p-homogeneous convex functional.
///
/// Copies share the underlying graph and matrix. For graphs with Dirichlet
/// nodes the ambient space is the set of signals vanishing there: every
/// operation first zeroes those entries (see to_domain).
class FunctionalHandle {
public:
  FunctionalKind kind() const noexcept { return kind_; }
  double degree() const noexcept { return degree_; }
  bool one_homogeneous() const noexcept { return degree_ == 1.0; }
  std::size_t dimension() const noexcept { return n_; }
  std::span<const double> measure() const noexcept { return *measure_; }
  const WeightedGraph* graph() const noexcept { return graph_.get(); }
  std::shared_ptr<const WeightedGraph> shared_graph() const noexcept { return graph_; }
  const DenseMatrix* matrix() const noexcept { return matrix_.get(); }
  bool has_dirichlet_nodes() const noexcept { return graph_ && graph_->has_boundary(); }

  /// Measure-orthonormal basis of the nullspace N_J.
  const std::vector<Signal>& nullspace_basis() const noexcept { return *nullspace_; }

  /// J(u); throws DimensionMismatch.
  double evaluate(const Signal& u) const;

  /// u with Dirichlet entries set to zero (identity without Dirichlet nodes).
  Signal to_domain(Signal u) const;

  double inner(const Signal& a, const Signal& b) const { return dot(a, b, measure()); }
  double norm(const Signal& a) const { return nlspec::norm(a, measure()); }

  std::string describe() const;

private:
  friend FunctionalHandle make_functional(FunctionalKind, std::shared_ptr<const WeightedGraph>, FunctionalParams);

  FunctionalHandle() = default;

  FunctionalKind kind_ = FunctionalKind::l1;
  double degree_ = 1.0;
  std::size_t n_ = 0;
  std::shared_ptr<const WeightedGraph> graph_;
  std::shared_ptr<const DenseMatrix> matrix_;
  std::shared_ptr<const std::vector<double>> measure_;
  std::shared_ptr<const std::vector<Signal>> nullspace_;
};

/// Builds a catalog functional. Throws BadParams when params do not fit kind.
FunctionalHandle make_functional(FunctionalKind kind, std::shared_ptr<const WeightedGraph> graph,
                                 FunctionalParams params = {});

FunctionalHandle make_graph_tv(std::shared_ptr<const WeightedGraph> graph);
FunctionalHandle make_dirichlet_p(std::shared_ptr<const WeightedGraph> graph, double p);
FunctionalHandle make_lipschitz_sup(std::shared_ptr<const WeightedGraph> graph);
FunctionalHandle make_l1(std::size_t n, std::vector<double> measure = {});
FunctionalHandle make_linf(std::size_t n, std::vector<double> measure = {});
FunctionalHandle make_quadratic_form(DenseMatrix A, std::vector<double> measure = {});

/// Combinatorial graph Laplacian sum_e w_e (e_i - e_j)(e_i - e_j)^T.
DenseMatrix graph_laplacian(const WeightedGraph& graph);

}  // namespace nlspec
