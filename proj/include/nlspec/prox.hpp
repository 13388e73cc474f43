#pragma once

#include <cstddef>
#include <vector>

#include "nlspec/functional.hpp"
#include "nlspec/signal.hpp"

namespace nlspec {

/// Result of prox_{sigma J}(f) = argmin 1/2 ||u - f||^2 + sigma J(u).
struct ProxSolution {
  Signal u;
  Signal zeta;                ///< (f - u) / sigma, an approximate element of dJ(u)
  std::size_t iterations = 0;
  double gap = 0.0;           ///< certified absolute optimality gap of u
  bool converged = false;
  std::vector<double> dual;   ///< edge dual variables (graph solvers), reusable as a warm start
};

struct ProxOptions {
  double tol = 1e-12;            ///< stop when gap <= tol * (1 + |objective|)
  std::size_t max_iter = 200000;
  const std::vector<double>* warm_dual = nullptr;
};

/// Certified proximal step. Closed form for l1 and linf, conjugate gradients
/// for quadratic forms, accelerated dual projected gradient for graph_tv and
/// lipschitz_sup, damped Newton for dirichlet_p with p != 1, 2.
/// Non-convergence is reported through converged = false with the best iterate.
/// Throws BadStep for sigma <= 0.
ProxSolution prox(const FunctionalHandle& F, const Signal& f, double sigma, const ProxOptions& options);
ProxSolution prox(const FunctionalHandle& F, const Signal& f, double sigma, double tol = 1e-12,
                  std::size_t max_iter = 200000);

/// 1/2 ||u - f||^2 + sigma J(u) with f, u mapped into the domain.
double prox_objective(const FunctionalHandle& F, const Signal& f, double sigma, const Signal& u);

/// Nested grid search minimiser of the prox objective; the independent
/// oracle for prox. Dimension <= 4 (DimensionTooLarge otherwise).
Signal brute_force_prox(const FunctionalHandle& F, const Signal& f, double sigma, double radius,
                        std::size_t levels, std::size_t half_points = 0);

/// ||f - P_N f||^2 / J(f); below it prox_{sigma J}(f) != P_N f.
/// Throws NullspaceElement when J(f) = 0.
double prox_nonvanishing_bound(const FunctionalHandle& F, const Signal& f);

}  // namespace nlspec
