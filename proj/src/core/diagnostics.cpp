#include "nlspec/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "flow_network.hpp"
#include "nlspec/error.hpp"

namespace nlspec {

double nullspace_floor(std::size_t n) noexcept { return 1e-13 * std::sqrt(static_cast<double>(n)); }

double evaluate(const FunctionalHandle& F, const Signal& u) { return F.evaluate(u); }

Signal project_nullspace(const FunctionalHandle& F, const Signal& input) {
  const Signal u = F.to_domain(input);
  Signal out(u.size());
  for (const Signal& b : F.nullspace_basis()) axpy(F.inner(u, b), b, out);
  return out;
}

double rayleigh(const FunctionalHandle& F, const Signal& input) {
  const Signal u = F.to_domain(input);
  const Signal r = u - project_nullspace(F, u);
  const double nr = F.norm(r);
  if (nr < nullspace_floor(u.size())) throw NullspaceElement("rayleigh quotient undefined on N_J");
  return F.degree() * F.evaluate(r) / std::pow(nr, F.degree());
}

double euler_residual(const FunctionalHandle& F, const Signal& u, const Signal& zeta) {
  require_same_size(u, zeta, "euler_residual");
  const Signal v = F.to_domain(u);
  return std::abs(F.degree() * F.evaluate(v) - F.inner(F.to_domain(zeta), v));
}

bool dual_ball_membership(const FunctionalHandle& F, const Signal& input, double tol) {
  if (!F.one_homogeneous()) throw UnsupportedFunctional("dual ball is defined for one-homogeneous functionals");
  require_size(input, F.dimension(), "dual_ball_membership");
  const Signal zeta = F.to_domain(input);
  const auto m = F.measure();
  const double radius = 1.0 + std::max(tol, 0.0);
  switch (F.kind()) {
    case FunctionalKind::l1:
      return max_abs(zeta) <= radius;
    case FunctionalKind::linf: {
      double s = 0.0;
      for (std::size_t i = 0; i < zeta.size(); ++i) s += m[i] * std::abs(zeta[i]);
      return s <= radius;
    }
    case FunctionalKind::graph_tv:
    case FunctionalKind::lipschitz_sup: {
      const WeightedGraph& g = *F.graph();
      std::vector<double> supply(zeta.size());
      for (std::size_t i = 0; i < zeta.size(); ++i) supply[i] = m[i] * zeta[i];
      if (F.kind() == FunctionalKind::graph_tv) return detail::capacity_flow_feasible(g, supply, radius, tol);
      return detail::transport_cost(g, supply, tol) <= radius * (1.0 + 1e-12);
    }
    default:
      throw UnsupportedFunctional(std::string(to_string(F.kind())) + " is not one-homogeneous");
  }
}

Signal min_norm_subgradient(const FunctionalHandle& F, const Signal& u) {
  require_size(u, F.dimension(), "min_norm_subgradient");
  const auto m = F.measure();
  Signal zeta(u.size());
  if (F.kind() == FunctionalKind::l1) {
    for (std::size_t i = 0; i < u.size(); ++i) zeta[i] = u[i] > 0.0 ? 1.0 : (u[i] < 0.0 ? -1.0 : 0.0);
    return zeta;
  }
  if (F.kind() == FunctionalKind::linf) {
    const double top = max_abs(u);
    if (top == 0.0) throw ZeroSignal("linf subdifferential at 0 has no unique minimal element here");
    const double band = top - 1e-9 * top;
    double mass = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      if (std::abs(u[i]) >= band) mass += m[i];
    for (std::size_t i = 0; i < u.size(); ++i)
      if (std::abs(u[i]) >= band) zeta[i] = (u[i] > 0.0 ? 1.0 : -1.0) / mass;
    return zeta;
  }
  throw UnsupportedFunctional("closed-form minimal-norm subgradient exists for l1 and linf only");
}

double EigenCertificate::worst() const noexcept {
  return std::max({euler_residual, subgradient_gap, collinearity});
}

EigenCertificate eigen_certificate(const FunctionalHandle& F, const Signal& input, double lambda,
                                   std::size_t samples, std::uint64_t seed) {
  const Signal w = F.to_domain(input);
  const double nw = F.norm(w);
  if (nw == 0.0) throw ZeroSignal("eigen certificate of the zero signal");
  const double p = F.degree();
  const Signal zeta = (lambda * std::pow(nw, p - 2.0)) * w;

  EigenCertificate cert;
  const double Jw = F.evaluate(w);
  cert.euler_residual = std::abs(p * Jw - F.inner(zeta, w));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const WeightedGraph* g = F.graph();
  double gap = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    Signal v(w.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!g || !g->is_boundary(i)) v[i] = gauss(rng);
    const double nv = F.norm(v);
    if (nv == 0.0) continue;
    v *= 1.0 / nv;
    for (double scale : {1.0, nw}) {
      const Signal vs = scale * v;
      gap = std::max(gap, Jw + F.inner(zeta, vs - w) - F.evaluate(vs));
    }
  }
  cert.subgradient_gap = gap;

  const double nz = F.norm(zeta);
  cert.collinearity = nz > 0.0 ? std::max(0.0, 1.0 - F.inner(zeta, w) / (nz * nw)) : 0.0;
  return cert;
}

}  // namespace nlspec
