#pragma once

#include <cstddef>
#include <cstdint>

#include "nlspec/functional.hpp"
#include "nlspec/signal.hpp"

namespace nlspec {

/// ||u - P_N u|| below this is treated as a nullspace element.
double nullspace_floor(std::size_t n) noexcept;

/// J(u) >= 0. Throws DimensionMismatch.
double evaluate(const FunctionalHandle& F, const Signal& u);

/// Orthogonal projection onto N_J in the weighted inner product.
Signal project_nullspace(const FunctionalHandle& F, const Signal& u);

/// p J(u - P_N u) / ||u - P_N u||^p. Throws NullspaceElement.
double rayleigh(const FunctionalHandle& F, const Signal& u);

/// |p J(u) - <zeta, u>|, zero whenever zeta lies in dJ(u).
double euler_residual(const FunctionalHandle& F, const Signal& u, const Signal& zeta);

/// Whether zeta lies in (1 + tol) K_J, K_J = dJ(0). One-homogeneous functionals
/// only (UnsupportedFunctional otherwise). graph_tv is decided by a max-flow
/// feasibility test, lipschitz_sup by a min-cost transport.
bool dual_ball_membership(const FunctionalHandle& F, const Signal& zeta, double tol);

/// Closed-form minimal-norm subgradient for l1 and linf.
Signal min_norm_subgradient(const FunctionalHandle& F, const Signal& u);

struct EigenCertificate {
  double euler_residual = 0.0;
  double subgradient_gap = 0.0;
  double collinearity = 0.0;

  double worst() const noexcept;
};

/// Checks lambda ||w||^{p-2} w against dJ(w). A positive subgradient_gap
/// proves w is not an eigenvector for lambda; zeros are necessary only.
EigenCertificate eigen_certificate(const FunctionalHandle& F, const Signal& w, double lambda,
                                   std::size_t samples = 64, std::uint64_t seed = 0);

}  // namespace nlspec
