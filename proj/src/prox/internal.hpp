#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "nlspec/functional.hpp"
#include "nlspec/graph.hpp"
#include "nlspec/prox.hpp"
#include "nlspec/signal.hpp"

namespace nlspec::detail {

/// (D u)_e = u_j - u_i for e = (i, j).
void edge_difference(const WeightedGraph& g, const Signal& u, std::vector<double>& out);

/// Adjoint of edge_difference: (D^T phi)_i = sum_{e=(j,i)} phi_e - sum_{e=(i,j)} phi_e.
void edge_adjoint(const WeightedGraph& g, std::span<const double> phi, Signal& out);

void zero_dirichlet(const WeightedGraph* g, Signal& u);

/// theta >= 0 with sum_i a_i (|y_i| - theta)_+ = r, or 0 when sum_i a_i |y_i| <= r.
double l1_threshold(std::span<const double> y, std::span<const double> a, double r);

/// Euclidean projection onto {x : ||x||_1 <= radius}.
void project_l1_ball(std::vector<double>& x, double radius);

/// Conjugate gradients for an SPD operator; entries flagged in `fixed` stay 0.
/// Stops when ||r|| <= rel_tol * ||b|| or after max_iter steps.
template <class Apply>
std::size_t conjugate_gradient(Apply&& apply, const Signal& b, Signal& x, double rel_tol, std::size_t max_iter) {
  Signal r = b - apply(x);
  Signal p = r;
  double rr = dot(r, r);
  const double target = rel_tol * rel_tol * std::max(dot(b, b), 1e-300);
  std::size_t it = 0;
  for (; it < max_iter && rr > target; ++it) {
    const Signal Ap = apply(p);
    const double pAp = dot(p, Ap);
    if (!(pAp > 0.0)) break;
    const double alpha = rr / pAp;
    axpy(alpha, p, x);
    axpy(-alpha, Ap, r);
    const double rr_new = dot(r, r);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
  }
  return it;
}

ProxSolution prox_edge_dual(const FunctionalHandle& F, const Signal& f, double sigma, const ProxOptions& options);
ProxSolution prox_quadratic(const FunctionalHandle& F, const Signal& f, double sigma, const ProxOptions& options);
ProxSolution prox_dirichlet_newton(const FunctionalHandle& F, const Signal& f, double sigma,
                                   const ProxOptions& options);

}  // namespace nlspec::detail
