#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "nlspec/error.hpp"
#include "nlspec/functional.hpp"
#include "nlspec/oracles.hpp"

namespace nlspec {

namespace {

constexpr std::size_t kDenseNullspaceLimit = 500;

std::vector<std::size_t> free_nodes(const WeightedGraph* g, std::size_t n) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; ++i)
    if (!g || !g->is_boundary(i)) idx.push_back(i);
  return idx;
}

std::vector<Signal> constant_nullspace(std::span<const double> m) {
  double total = 0.0;
  for (double v : m) total += v;
  return {Signal(m.size(), 1.0 / std::sqrt(total))};
}

// Nullspace and PSD check for quadratic forms, restricted to the free nodes.
std::vector<Signal> quadratic_nullspace(const DenseMatrix& A, const WeightedGraph* g, std::span<const double> m) {
  const std::size_t n = A.rows();
  const auto idx = free_nodes(g, n);
  if (idx.size() <= kDenseNullspaceLimit) {
    DenseMatrix sub(idx.size(), idx.size());
    std::vector<double> msub(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) {
      msub[a] = m[idx[a]];
      for (std::size_t b = 0; b < idx.size(); ++b) sub(a, b) = A(idx[a], idx[b]);
    }
    const auto spec = oracles::dense_symmetric_eigs(sub, msub);
    double scale = 0.0;
    for (double l : spec.eigenvalues) scale = std::max(scale, std::abs(l));
    const double floor = 1e-10 * std::max(scale, 1e-300);
    if (!spec.eigenvalues.empty() && spec.eigenvalues.front() < -floor)
      throw BadParams("quadratic_form matrix is not positive semidefinite (eigenvalue " +
                      std::to_string(spec.eigenvalues.front()) + ")");
    std::vector<Signal> basis;
    for (std::size_t k = 0; k < spec.eigenvalues.size() && spec.eigenvalues[k] <= floor; ++k) {
      Signal b(n);
      for (std::size_t a = 0; a < idx.size(); ++a) b[idx[a]] = spec.eigenvectors[k][a];
      basis.push_back(std::move(b));
    }
    return basis;
  }

  // Large matrices: sampled nonnegativity, constants-or-trivial nullspace.
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> gauss;
  const double scale = A.max_abs();
  for (int s = 0; s < 64; ++s) {
    Signal x(n);
    for (std::size_t i : idx) x[i] = gauss(rng);
    if (dot(A.apply(x), x) < -1e-10 * scale * dot(x, x)) throw BadParams("quadratic_form matrix is not positive semidefinite");
  }
  Signal ones(n);
  for (std::size_t i : idx) ones[i] = 1.0;
  if (max_abs(A.apply(ones)) <= 1e-12 * std::max(scale, 1e-300) * static_cast<double>(n) && !(g && g->has_boundary())) {
    return constant_nullspace(m);
  }
  return {};
}

}  // namespace

std::string_view to_string(FunctionalKind kind) noexcept {
  switch (kind) {
    case FunctionalKind::quadratic_form: return "quadratic_form";
    case FunctionalKind::dirichlet_p: return "dirichlet_p";
    case FunctionalKind::graph_tv: return "graph_tv";
    case FunctionalKind::l1: return "l1";
    case FunctionalKind::linf: return "linf";
    case FunctionalKind::lipschitz_sup: return "lipschitz_sup";
  }
  return "unknown";
}

FunctionalKind parse_functional_kind(std::string_view name) {
  for (auto k : {FunctionalKind::quadratic_form, FunctionalKind::dirichlet_p, FunctionalKind::graph_tv,
                 FunctionalKind::l1, FunctionalKind::linf, FunctionalKind::lipschitz_sup})
    if (to_string(k) == name) return k;
  throw BadParams("unknown functional kind '" + std::string(name) + "'");
}

DenseMatrix graph_laplacian(const WeightedGraph& graph) {
  DenseMatrix L(graph.node_count(), graph.node_count());
  for (const Edge& e : graph.edges()) {
    L(e.i, e.i) += e.w;
    L(e.j, e.j) += e.w;
    L(e.i, e.j) -= e.w;
    L(e.j, e.i) -= e.w;
  }
  return L;
}

FunctionalHandle make_functional(FunctionalKind kind, std::shared_ptr<const WeightedGraph> graph,
                                 FunctionalParams params) {
  FunctionalHandle h;
  h.kind_ = kind;
  h.graph_ = std::move(graph);

  const bool needs_graph = kind == FunctionalKind::dirichlet_p || kind == FunctionalKind::graph_tv ||
                           kind == FunctionalKind::lipschitz_sup;
  if (needs_graph && !h.graph_) throw BadParams(std::string(to_string(kind)) + " needs a graph");

  if (h.graph_) {
    h.n_ = h.graph_->node_count();
    if (params.dimension != 0 && params.dimension != h.n_) throw BadParams("dimension differs from graph node count");
    h.measure_ = std::make_shared<const std::vector<double>>(h.graph_->node_measure().begin(),
                                                            h.graph_->node_measure().end());
  } else {
    h.n_ = params.dimension;
    if (kind == FunctionalKind::quadratic_form && h.n_ == 0 && params.matrix) h.n_ = params.matrix->rows();
    if (h.n_ == 0) throw BadParams("dimension must be >= 1");
    std::vector<double> m = params.node_measure;
    if (m.empty()) m.assign(h.n_, 1.0);
    if (m.size() != h.n_) throw BadParams("node_measure length differs from dimension");
    for (double v : m)
      if (!(v > 0.0) || !std::isfinite(v)) throw BadParams("node measure must be finite and > 0");
    h.measure_ = std::make_shared<const std::vector<double>>(std::move(m));
  }

  std::vector<Signal> nullspace;
  switch (kind) {
    case FunctionalKind::graph_tv:
    case FunctionalKind::lipschitz_sup:
      h.degree_ = 1.0;
      break;
    case FunctionalKind::dirichlet_p:
      if (!(params.exponent >= 1.0) || !std::isfinite(params.exponent)) throw BadParams("dirichlet_p requires p >= 1");
      h.degree_ = params.exponent;
      break;
    case FunctionalKind::l1:
    case FunctionalKind::linf:
      h.degree_ = 1.0;
      break;
    case FunctionalKind::quadratic_form: {
      h.degree_ = 2.0;
      DenseMatrix A = params.matrix ? *params.matrix : (h.graph_ ? graph_laplacian(*h.graph_) : DenseMatrix{});
      if (A.rows() != h.n_ || A.cols() != h.n_) throw BadParams("quadratic_form matrix must be n x n");
      if (!A.is_symmetric()) throw BadParams("quadratic_form matrix must be symmetric");
      nullspace = quadratic_nullspace(A, h.graph_.get(), *h.measure_);
      h.matrix_ = std::make_shared<const DenseMatrix>(std::move(A));
      break;
    }
  }
  if (needs_graph && !h.graph_->has_boundary()) nullspace = constant_nullspace(*h.measure_);
  h.nullspace_ = std::make_shared<const std::vector<Signal>>(std::move(nullspace));
  return h;
}

FunctionalHandle make_graph_tv(std::shared_ptr<const WeightedGraph> graph) {
  return make_functional(FunctionalKind::graph_tv, std::move(graph));
}

FunctionalHandle make_dirichlet_p(std::shared_ptr<const WeightedGraph> graph, double p) {
  FunctionalParams params;
  params.exponent = p;
  return make_functional(FunctionalKind::dirichlet_p, std::move(graph), params);
}

FunctionalHandle make_lipschitz_sup(std::shared_ptr<const WeightedGraph> graph) {
  return make_functional(FunctionalKind::lipschitz_sup, std::move(graph));
}

FunctionalHandle make_l1(std::size_t n, std::vector<double> measure) {
  FunctionalParams params;
  params.dimension = n;
  params.node_measure = std::move(measure);
  return make_functional(FunctionalKind::l1, nullptr, params);
}

FunctionalHandle make_linf(std::size_t n, std::vector<double> measure) {
  FunctionalParams params;
  params.dimension = n;
  params.node_measure = std::move(measure);
  return make_functional(FunctionalKind::linf, nullptr, params);
}

FunctionalHandle make_quadratic_form(DenseMatrix A, std::vector<double> measure) {
  FunctionalParams params;
  params.dimension = A.rows();
  params.node_measure = std::move(measure);
  params.matrix = std::move(A);
  return make_functional(FunctionalKind::quadratic_form, nullptr, params);
}

Signal FunctionalHandle::to_domain(Signal u) const {
  require_size(u, n_, "functional domain");
  if (graph_ && graph_->has_boundary())
    for (std::size_t b : graph_->boundary()) u[b] = 0.0;
  return u;
}

double FunctionalHandle::evaluate(const Signal& input) const {
  require_size(input, n_, "evaluate");
  const Signal u = to_domain(input);
  const auto m = measure();
  switch (kind_) {
    case FunctionalKind::graph_tv: {
      double s = 0.0;
      for (const Edge& e : graph_->edges()) s += e.w * std::abs(u[e.j] - u[e.i]);
      return s;
    }
    case FunctionalKind::dirichlet_p: {
      double s = 0.0;
      for (const Edge& e : graph_->edges()) s += e.w * std::pow(std::abs(u[e.j] - u[e.i]), degree_);
      return s / degree_;
    }
    case FunctionalKind::lipschitz_sup: {
      double s = 0.0;
      for (const Edge& e : graph_->edges()) s = std::max(s, e.w * std::abs(u[e.j] - u[e.i]));
      return s;
    }
    case FunctionalKind::l1: {
      double s = 0.0;
      for (std::size_t i = 0; i < n_; ++i) s += m[i] * std::abs(u[i]);
      return s;
    }
    case FunctionalKind::linf:
      return max_abs(u);
    case FunctionalKind::quadratic_form:
      // PSD: negative values are rounding noise
      return std::max(0.0, 0.5 * dot(matrix_->apply(u), u));
  }
  return 0.0;
}

std::string FunctionalHandle::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(n=" << n_ << ", p=" << degree_;
  if (graph_) os << ", edges=" << graph_->edge_count() << ", dirichlet=" << graph_->boundary().size();
  os << ")";
  return os.str();
}

}  // namespace nlspec
