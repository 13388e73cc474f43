#include <algorithm>
#include <cmath>

#include "internal.hpp"

namespace nlspec::detail {
namespace {

// A u for the quadratic part: the explicit matrix, or the weighted Laplacian.
Signal apply_quadratic(const FunctionalHandle& F, const Signal& u) {
  if (F.matrix()) return F.matrix()->apply(u);
  const WeightedGraph& g = *F.graph();
  Signal out(u.size());
  for (const Edge& e : g.edges()) {
    const double d = e.w * (u[e.j] - u[e.i]);
    out[e.j] += d;
    out[e.i] -= d;
  }
  return out;
}

double weighted_residual_gap(const Signal& r, std::span<const double> m) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r[i] * r[i] / m[i];
  return 0.5 * s;
}

}  // namespace

ProxSolution prox_quadratic(const FunctionalHandle& F, const Signal& f, double sigma, const ProxOptions& options) {
  const auto m = F.measure();
  const WeightedGraph* g = F.graph();
  auto H = [&](const Signal& x) {
    Signal y = apply_quadratic(F, x);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = m[i] * x[i] + sigma * y[i];
    zero_dirichlet(g, y);
    return y;
  };
  Signal b(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) b[i] = m[i] * f[i];
  zero_dirichlet(g, b);

  ProxSolution s;
  s.u = f;
  const std::size_t chunk = std::max<std::size_t>(4 * f.size(), 50);
  for (;;) {
    const Signal r = b - H(s.u);
    s.gap = weighted_residual_gap(r, m);
    const double obj = prox_objective(F, f, sigma, s.u);
    if (s.gap <= options.tol * (1.0 + std::abs(obj))) {
      s.converged = true;
      break;
    }
    if (s.iterations >= options.max_iter) break;
    const std::size_t before = s.iterations;
    s.iterations += conjugate_gradient(H, b, s.u, 1e-15, std::min(chunk, options.max_iter - s.iterations));
    if (s.iterations == before) break;
  }
  s.zeta = Signal(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) s.zeta[i] = (f[i] - s.u[i]) / sigma;
  return s;
}

namespace {

struct PowerEdgeModel {
  const WeightedGraph& g;
  std::span<const double> m;
  const Signal& f;
  double sigma;
  double p;

  double objective(const Signal& u) const {
    double fit = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) fit += m[i] * (u[i] - f[i]) * (u[i] - f[i]);
    double J = 0.0;
    for (const Edge& e : g.edges()) J += e.w * std::pow(std::abs(u[e.j] - u[e.i]), p);
    return 0.5 * fit + sigma * J / p;
  }

  // Edge fluxes phi_e = w |Du|^{p-1} sign(Du); they certify the gap.
  std::vector<double> flux(const Signal& u) const {
    const auto& edges = g.edges();
    std::vector<double> phi(edges.size());
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const double d = u[edges[k].j] - u[edges[k].i];
      phi[k] = edges[k].w * std::copysign(std::pow(std::abs(d), p - 1.0), d);
    }
    return phi;
  }

  double dual(const std::vector<double>& phi) const {
    Signal div;
    edge_adjoint(g, phi, div);
    zero_dirichlet(&g, div);
    const double q = p / (p - 1.0);
    double lin = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      lin += div[i] * f[i];
      quad += div[i] * div[i] / m[i];
    }
    double conj = 0.0;
    const auto& edges = g.edges();
    for (std::size_t k = 0; k < edges.size(); ++k)
      conj += std::pow(edges[k].w, 1.0 - q) * std::pow(std::abs(phi[k]), q) / q;
    return sigma * lin - 0.5 * sigma * sigma * quad - sigma * conj;
  }
};

}  // namespace

// Dual: sigma <D^T phi, f> - sigma^2/2 ||M^{-1} D^T phi||_M^2 - sigma sum g*(phi), maximal at phi(u*).
ProxSolution prox_dirichlet_newton(const FunctionalHandle& F, const Signal& f, double sigma,
                                   const ProxOptions& options) {
  const WeightedGraph& g = *F.graph();
  const auto m = F.measure();
  const double p = F.degree();
  const PowerEdgeModel model{g, m, f, sigma, p};
  const auto& edges = g.edges();
  const double floor_diff = 1e-8 * std::max(max_abs(f), 1e-300);
  const double curvature_cap = p < 2.0 ? (p - 1.0) * std::pow(floor_diff, p - 2.0) : INFINITY;

  auto gradient = [&](const Signal& u, std::vector<double>* flux) {
    std::vector<double> phi = model.flux(u);
    Signal grad;
    edge_adjoint(g, phi, grad);
    for (std::size_t i = 0; i < f.size(); ++i) grad[i] = m[i] * (u[i] - f[i]) + sigma * grad[i];
    zero_dirichlet(&g, grad);
    if (flux) *flux = std::move(phi);
    return grad;
  };
  auto grad_norm = [&](const Signal& grad) {
    double t = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) t += grad[i] * grad[i] / m[i];
    return std::sqrt(t);
  };
  std::vector<double> du;
  auto newton_direction = [&](const Signal& u, const Signal& grad) {
    edge_difference(g, u, du);
    std::vector<double> h(edges.size());
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const double a = std::abs(du[k]);
      const double c = a > 0.0 ? (p - 1.0) * std::pow(a, p - 2.0) : (p > 2.0 ? 0.0 : curvature_cap);
      h[k] = sigma * edges[k].w * std::min(c, curvature_cap);
    }
    auto Hop = [&](const Signal& x) {
      Signal y(x.size());
      for (std::size_t k = 0; k < edges.size(); ++k) {
        const double t = h[k] * (x[edges[k].j] - x[edges[k].i]);
        y[edges[k].j] += t;
        y[edges[k].i] -= t;
      }
      for (std::size_t i = 0; i < x.size(); ++i) y[i] += m[i] * x[i];
      zero_dirichlet(&g, y);
      return y;
    };
    Signal rhs = -1.0 * grad;
    Signal dir(f.size());
    conjugate_gradient(Hop, rhs, dir, 1e-14, 4 * f.size() + 50);
    if (!(dot(grad, dir) < 0.0)) {
      dir = rhs;
      for (std::size_t i = 0; i < dir.size(); ++i) dir[i] /= m[i];
    }
    return dir;
  };

  ProxSolution s;
  s.u = f;
  double obj = model.objective(s.u);
  double best_gap = INFINITY;
  Signal best_u = s.u;
  for (;;) {
    std::vector<double> phi;
    const Signal grad = gradient(s.u, &phi);
    const double gap = std::max(obj - model.dual(phi), 0.0);
    if (gap < best_gap) {
      best_gap = gap;
      best_u = s.u;
    }
    if (gap <= options.tol * (1.0 + std::abs(obj))) {
      s.converged = true;
      break;
    }
    if (s.iterations >= options.max_iter) break;
    ++s.iterations;

    const Signal dir = newton_direction(s.u, grad);
    double alpha = 1.0;
    const double slope = dot(grad, dir);
    bool moved = false;
    for (int ls = 0; ls < 80 && !moved; ++ls, alpha *= 0.5) {
      Signal trial = s.u;
      axpy(alpha, dir, trial);
      const double v = model.objective(trial);
      if (v <= obj + 1e-4 * alpha * slope) {
        s.u = std::move(trial);
        obj = v;
        moved = true;
      }
    }
    if (!moved) break;
  }
  if (s.converged) {
    // the gap resolves u only to about sqrt(eps); full Newton steps while the
    // gradient keeps shrinking take it to rounding level
    const double floor_grad = 1e-15 * (1.0 + norm(f, m));
    Signal grad = gradient(s.u, nullptr);
    double gn = grad_norm(grad);
    for (int extra = 0; extra < 8 && gn > floor_grad; ++extra) {
      Signal trial = s.u;
      axpy(1.0, newton_direction(s.u, grad), trial);
      Signal tg = gradient(trial, nullptr);
      const double tn = grad_norm(tg);
      if (!(tn < 0.5 * gn)) break;
      std::vector<double> phi;
      gradient(trial, &phi);
      const double tgap = std::max(model.objective(trial) - model.dual(phi), 0.0);
      if (tgap > options.tol * (1.0 + std::abs(obj))) break;
      s.u = std::move(trial);
      best_gap = std::min(best_gap, tgap);
      grad = std::move(tg);
      gn = tn;
    }
  }
  if (!s.converged) s.u = best_u;
  s.gap = best_gap;
  s.zeta = Signal(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) s.zeta[i] = (f[i] - s.u[i]) / sigma;
  return s;
}

}  // namespace nlspec::detail
