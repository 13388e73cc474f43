#include <algorithm>
#include <cmath>
#include <numeric>

#include "internal.hpp"

namespace nlspec::detail {
namespace {

// Dual of min 1/2 ||u - f||_M^2 + sigma max_{psi in B} <psi, K u> with K = W D;
// B is the unit box (graph_tv) or the unit l1 ball (lipschitz_sup).
struct EdgeDual {
  const WeightedGraph& g;
  std::span<const double> m;
  const Signal& f;
  double sigma;
  bool box;

  void primal(const std::vector<double>& psi, Signal& u) const {
    const auto& edges = g.edges();
    std::vector<double> t(edges.size());
    for (std::size_t k = 0; k < edges.size(); ++k) t[k] = edges[k].w * psi[k];
    edge_adjoint(g, t, u);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = f[i] - sigma * u[i] / m[i];
    zero_dirichlet(&g, u);
  }

  void apply_K(const Signal& u, std::vector<double>& out) const {
    const auto& edges = g.edges();
    out.resize(edges.size());
    for (std::size_t k = 0; k < edges.size(); ++k) out[k] = edges[k].w * (u[edges[k].j] - u[edges[k].i]);
  }

  double J(const Signal& u) const {
    double s = 0.0;
    for (const Edge& e : g.edges()) {
      const double v = e.w * std::abs(u[e.j] - u[e.i]);
      s = box ? s + v : std::max(s, v);
    }
    return s;
  }

  double primal_value(const Signal& u) const {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += m[i] * (u[i] - f[i]) * (u[i] - f[i]);
    return 0.5 * s + sigma * J(u);
  }

  // D(psi) with u = u(psi)
  double dual_value(const Signal& u_of_psi) const {
    double s = 0.0;
    for (std::size_t i = 0; i < u_of_psi.size(); ++i) s += m[i] * (f[i] * f[i] - u_of_psi[i] * u_of_psi[i]);
    return 0.5 * s;
  }

  void project(std::vector<double>& psi) const {
    if (box)
      for (double& v : psi) v = std::clamp(v, -1.0, 1.0);
    else
      project_l1_ball(psi, 1.0);
  }

  // Gershgorin bound on || K M^{-1} K^T || restricted to free nodes.
  double operator_bound() const {
    const std::size_t n = g.node_count();
    std::vector<double> row(n, 0.0);
    for (const Edge& e : g.edges()) {
      const double w2 = e.w * e.w;
      const bool fi = !g.is_boundary(e.i);
      const bool fj = !g.is_boundary(e.j);
      if (fi) row[e.i] += w2 / m[e.i];
      if (fj) row[e.j] += w2 / m[e.j];
      if (fi && fj) {
        const double off = w2 / std::sqrt(m[e.i] * m[e.j]);
        row[e.i] += off;
        row[e.j] += off;
      }
    }
    return *std::max_element(row.begin(), row.end());
  }
};

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

struct Candidate {
  Signal u;
  std::vector<double> psi;
  double primal = INFINITY;
  double dual = -INFINITY;
};

// Guess the active structure of u (clusters of equal value and signs of the
// jumps between them), solve the reduced problem exactly and build a matching
// dual by an electrical flow inside each cluster.
bool polish_tv(const EdgeDual& P, const Signal& u, double gap, Candidate& out) {
  const WeightedGraph& g = P.g;
  const auto& edges = g.edges();
  const std::size_t n = g.node_count();
  const double mmin = *std::min_element(P.m.begin(), P.m.end());
  const double delta = 4.0 * std::sqrt(2.0 * std::max(gap, 0.0) / mmin) + 1e-15 * (1.0 + max_abs(u));

  UnionFind uf(n + 1);
  const std::size_t zero = n;
  for (std::size_t b : g.boundary()) uf.unite(b, zero);
  std::vector<char> intra(edges.size(), 0);
  for (std::size_t k = 0; k < edges.size(); ++k)
    if (std::abs(u[edges[k].j] - u[edges[k].i]) <= delta) {
      intra[k] = 1;
      uf.unite(edges[k].i, edges[k].j);
    }
  std::vector<double> psi(edges.size(), 0.0);
  for (std::size_t k = 0; k < edges.size(); ++k)
    if (!intra[k] && uf.find(edges[k].i) == uf.find(edges[k].j)) intra[k] = 1;
  for (std::size_t k = 0; k < edges.size(); ++k)
    if (!intra[k]) psi[k] = u[edges[k].j] > u[edges[k].i] ? 1.0 : -1.0;

  // K^T psi_cross
  Signal cross;
  {
    std::vector<double> t(edges.size());
    for (std::size_t k = 0; k < edges.size(); ++k) t[k] = edges[k].w * psi[k];
    edge_adjoint(g, t, cross);
  }
  std::vector<double> num(n + 1, 0.0), den(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = uf.find(i);
    num[c] += P.m[i] * P.f[i] - P.sigma * cross[i];
    den[c] += P.m[i];
  }
  const std::size_t zroot = uf.find(zero);
  Signal up(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = uf.find(i);
    up[i] = (g.has_boundary() && c == zroot) ? 0.0 : num[c] / den[c];
  }
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (intra[k]) continue;
    const double d = up[edges[k].j] - up[edges[k].i];
    if (!(d * psi[k] > 0.0)) return false;
  }

  // intra-cluster potentials: L_intra y = M (f - up) / sigma - K^T psi_cross on free nodes
  Signal b(n);
  std::vector<char> touched(n, 0);
  for (std::size_t k = 0; k < edges.size(); ++k)
    if (intra[k]) touched[edges[k].i] = touched[edges[k].j] = 1;
  for (std::size_t i = 0; i < n; ++i)
    if (!g.is_boundary(i) && touched[i]) b[i] = P.m[i] * (P.f[i] - up[i]) / P.sigma - cross[i];
  auto L = [&](const Signal& y) {
    Signal r(n);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      if (!intra[k]) continue;
      const double t = edges[k].w * (y[edges[k].j] - y[edges[k].i]);
      r[edges[k].j] += t;
      r[edges[k].i] -= t;
    }
    for (std::size_t i = 0; i < n; ++i) r[i] = g.is_boundary(i) ? 0.0 : -r[i];
    return r;
  };
  Signal y(n);
  conjugate_gradient(L, b, y, 1e-15, 4 * n + 100);
  for (std::size_t k = 0; k < edges.size(); ++k)
    if (intra[k]) psi[k] = y[edges[k].j] - y[edges[k].i];
  P.project(psi);

  out.u = std::move(up);
  out.primal = P.primal_value(out.u);
  Signal ud;
  P.primal(psi, ud);
  out.dual = P.dual_value(ud);
  out.psi = std::move(psi);
  return true;
}

}  // namespace

ProxSolution prox_edge_dual(const FunctionalHandle& F, const Signal& f, double sigma, const ProxOptions& options) {
  const WeightedGraph& g = *F.graph();
  const bool box = F.kind() != FunctionalKind::lipschitz_sup;
  const EdgeDual P{g, F.measure(), f, sigma, box};
  const std::size_t E = g.edge_count();

  ProxSolution s;
  const double bound = E ? P.operator_bound() : 0.0;
  if (E == 0 || bound == 0.0) {
    s.u = f;
    s.zeta = Signal(f.size());
    s.converged = true;
    s.dual.assign(E, 0.0);
    return s;
  }
  const double step = 1.0 / (sigma * bound);

  std::vector<double> psi(E, 0.0);
  if (options.warm_dual && options.warm_dual->size() == E) {
    psi = *options.warm_dual;
    P.project(psi);
  }
  std::vector<double> y = psi, prev = psi, grad;
  double t = 1.0;
  Signal u;

  // the best primal and the best dual are tracked separately: any feasible
  // dual point bounds every primal candidate
  Signal best_u;
  double best_primal = INFINITY;
  std::vector<double> best_psi;
  double best_dual = -INFINITY;
  auto offer = [&](const Candidate& c) {
    if (c.primal < best_primal) {
      best_primal = c.primal;
      best_u = c.u;
    }
    if (c.dual > best_dual) {
      best_dual = c.dual;
      best_psi = c.psi;
    }
  };
  auto certified = [&] { return best_primal - best_dual <= options.tol * (1.0 + std::abs(best_primal)); };

  const std::size_t check_every = 10;
  std::size_t next_polish = 20;
  bool polished_final = false;
  std::size_t k = 0;
  for (;; ++k) {
    if (k % check_every == 0) {
      P.primal(psi, u);
      const Candidate c{u, psi, P.primal_value(u), P.dual_value(u)};
      offer(c);
      // a certified iterate is still polished once: the exact active-set
      // solution is worth the extra solve
      const bool done = certified();
      if (box && (k >= next_polish || done) && !polished_final) {
        next_polish = std::min(2 * next_polish, next_polish + 500);
        polished_final = done;
        Candidate pc;
        if (polish_tv(P, c.u, c.primal - c.dual, pc)) offer(pc);
      }
      if (certified() || k >= options.max_iter) break;
    }
    P.primal(y, u);
    P.apply_K(u, grad);
    prev.swap(psi);
    psi = y;
    for (std::size_t e = 0; e < E; ++e) psi[e] += step * grad[e];
    P.project(psi);
    double restart = 0.0;
    for (std::size_t e = 0; e < E; ++e) restart += (y[e] - psi[e]) * (psi[e] - prev[e]);
    if (restart > 0.0) {
      t = 1.0;
      y = psi;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    for (std::size_t e = 0; e < E; ++e) y[e] = psi[e] + beta * (psi[e] - prev[e]);
    t = t_next;
  }
  s.iterations = k;
  s.u = std::move(best_u);
  s.gap = std::max(best_primal - best_dual, 0.0);
  s.converged = certified();
  s.dual = std::move(best_psi);
  s.zeta = Signal(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) s.zeta[i] = (f[i] - s.u[i]) / sigma;
  return s;
}

}  // namespace nlspec::detail
