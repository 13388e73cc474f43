#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "nlspec/cli.hpp"
#include "nlspec/diagnostics.hpp"
#include "nlspec/error.hpp"
#include "nlspec/grid.hpp"
#include "nlspec/oracles.hpp"
#include "nlspec/prox.hpp"

namespace nlspec::cli {
namespace {

namespace fs = std::filesystem;
using Rng = std::mt19937_64;

struct Outcome {
  bool passed = true;
  std::string detail;
};

/// Running maximum of a measured quantity against its bound.
struct Worst {
  double value = 0.0;
  std::size_t violations = 0;
  std::size_t samples = 0;

  void add(double v, double bound) {
    ++samples;
    value = std::max(value, v);
    if (!(v <= bound)) ++violations;
  }
  Outcome done(const char* what) const {
    std::ostringstream s;
    s << samples << " samples, worst " << what << " " << std::setprecision(3) << value;
    if (violations) s << ", " << violations << " violation(s)";
    return {violations == 0 && samples > 0, s.str()};
  }
};

struct Named {
  std::string name;
  FunctionalHandle F;
};

Signal gaussian(std::size_t n, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Signal s(n);
  for (double& x : s) x = g(rng);
  return s;
}

std::shared_ptr<const WeightedGraph> random_graph(std::size_t n, Rng& rng, bool boundary) {
  std::uniform_real_distribution<double> w(0.5, 2.0);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, w(rng)});
  if (n >= 3) edges.push_back({0, n - 1, w(rng)});
  std::vector<std::size_t> b;
  if (boundary) b.push_back(0);
  std::vector<double> m(n);
  for (double& x : m) x = w(rng);
  return std::make_shared<const WeightedGraph>(n, std::move(edges), std::move(b), std::move(m));
}

std::vector<Named> catalog(std::size_t n, Rng& rng, bool boundary) {
  auto g = random_graph(n, rng, boundary);
  std::vector<double> m(g->node_measure().begin(), g->node_measure().end());
  return {{"graph_tv", make_graph_tv(g)},
          {"lipschitz_sup", make_lipschitz_sup(g)},
          {"dirichlet_p1.5", make_dirichlet_p(g, 1.5)},
          {"dirichlet_p2", make_dirichlet_p(g, 2.0)},
          {"dirichlet_p3", make_dirichlet_p(g, 3.0)},
          {"l1", make_l1(n, m)},
          {"linf", make_linf(n, m)},
          {"quadratic_form", make_functional(FunctionalKind::quadratic_form, g)}};
}

/// Every (functional, seed, boundary) instance of the randomized matrix.
template <class Body>
void sweep(std::size_t n, std::size_t seeds, std::uint64_t base, Body&& body) {
  for (std::size_t s = 0; s < seeds; ++s) {
    Rng rng(base + s);
    for (bool boundary : {false, true})
      for (const Named& nf : catalog(n, rng, boundary)) body(nf, rng);
  }
}

struct Context {
  std::mutex mu;
  FlowLedger ledger;

  FlowTrace flow(const FunctionalHandle& F, const Signal& f, const FlowOptions& o = {}) {
    FlowTrace tr = run_flow(F, f, o);
    const FlowAudit a = audit_flow(tr, F);
    std::lock_guard<std::mutex> lock(mu);
    ++ledger.runs;
    if (!(a.mass_drift <= 1e-10)) ++ledger.mass_violations;
    ledger.lambda_violations += a.lambda_violations;
    ledger.worst_mass_drift = std::max(ledger.worst_mass_drift, a.mass_drift);
    ledger.worst_lambda_excess = std::max(ledger.worst_lambda_excess, a.worst_lambda_excess);
    ledger.worst_lambda_increase = std::max(ledger.worst_lambda_increase, a.worst_lambda_increase);
    return tr;
  }
};

struct Check {
  const char* section;
  const char* name;
  std::function<Outcome(Context&)> run;
};

double max_nullspace_inner(const FunctionalHandle& F, const Signal& u) {
  double s = 0.0;
  for (const Signal& b : F.nullspace_basis()) s = std::max(s, std::abs(F.inner(u, b)));
  return s;
}

// ---------------------------------------------------------------- core

Outcome homogeneity(Context&) {
  Worst w;
  sweep(6, 4, 100, [&](const Named& nf, Rng& rng) {
    const Signal u = gaussian(6, rng);
    const double J = nf.F.evaluate(u);
    for (double t : {-2.0, 0.5, 3.0})
      w.add(std::abs(nf.F.evaluate(t * u) - std::pow(std::abs(t), nf.F.degree()) * J) / (1 + J), 1e-10);
  });
  return w.done("relative error");
}

Outcome nonnegativity(Context&) {
  Worst w;
  sweep(6, 4, 110, [&](const Named& nf, Rng& rng) {
    for (int i = 0; i < 10; ++i) w.add(-std::min(nf.F.evaluate(gaussian(6, rng, 3.0)), 0.0), 0.0);
  });
  return w.done("negative part");
}

Outcome nullspace_invariance(Context&) {
  Worst w;
  sweep(6, 4, 120, [&](const Named& nf, Rng& rng) {
    if (nf.F.nullspace_basis().empty()) return;
    const Signal u = nf.F.to_domain(gaussian(6, rng));
    const double J = nf.F.evaluate(u);
    for (double c : {-3.0, 0.7, 5.0}) {
      Signal v = u;
      axpy(c, nf.F.nullspace_basis().front(), v);
      w.add(std::abs(nf.F.evaluate(v) - J) / (1 + J), 1e-10);
    }
  });
  return w.done("relative change");
}

Outcome projection_orthogonality(Context&) {
  Worst w;
  sweep(6, 4, 130, [&](const Named& nf, Rng& rng) {
    const Signal u = nf.F.to_domain(gaussian(6, rng));
    w.add(max_nullspace_inner(nf.F, u - project_nullspace(nf.F, u)) / (1 + nf.F.norm(u)), 1e-12);
  });
  return w.done("inner product");
}

Outcome rayleigh_scale(Context&) {
  Worst w;
  sweep(6, 4, 140, [&](const Named& nf, Rng& rng) {
    const Signal u = nf.F.to_domain(gaussian(6, rng));
    const double r = rayleigh(nf.F, u);
    for (double t : {-2.0, 0.5, 3.0}) w.add(std::abs(rayleigh(nf.F, t * u) - r) / std::max(r, 1e-300), 1e-10);
  });
  return w.done("relative change");
}

/// Random signal with ties at the maximum and exact zeros.
Signal tied(std::size_t n, Rng& rng) {
  Signal u = gaussian(n, rng);
  const double top = max_abs(u) * 1.5;
  u[0] = top;
  u[1] = -top;
  u[2] = 0.0;
  return u;
}

Outcome min_norm_subgradient_check(Context&) {
  Worst w;
  sweep(6, 4, 150, [&](const Named& nf, Rng& rng) {
    if (nf.F.kind() != FunctionalKind::l1 && nf.F.kind() != FunctionalKind::linf) return;
    const Signal u = tied(6, rng);
    const Signal z = min_norm_subgradient(nf.F, u);
    w.add(euler_residual(nf.F, u, z) / (1 + nf.F.evaluate(u)), 1e-12);
    w.add(dual_ball_membership(nf.F, z, 1e-12) ? 0.0 : 1.0, 0.0);
  });
  return w.done("residual");
}

Outcome minimality(Context&) {
  Worst w;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  sweep(6, 4, 160, [&](const Named& nf, Rng& rng) {
    const bool l1 = nf.F.kind() == FunctionalKind::l1;
    if (!l1 && nf.F.kind() != FunctionalKind::linf) return;
    const Signal u = tied(6, rng);
    const double zn = nf.F.norm(min_norm_subgradient(nf.F, u));
    const auto m = nf.F.measure();
    const double top = max_abs(u);
    for (int s = 0; s < 20; ++s) {
      Signal eta(6);
      if (l1) {
        for (std::size_t i = 0; i < 6; ++i) eta[i] = u[i] > 0 ? 1.0 : u[i] < 0 ? -1.0 : unit(rng);
      } else {
        // convex weights on the argmax set, represented in the weighted inner product
        double total = 0.0;
        for (std::size_t i = 0; i < 6; ++i)
          if (std::abs(u[i]) == top) eta[i] = std::abs(unit(rng)) + 1e-3, total += eta[i];
        for (std::size_t i = 0; i < 6; ++i) eta[i] = eta[i] / total * (u[i] > 0 ? 1.0 : -1.0) / m[i];
      }
      w.add(zn - nf.F.norm(eta), 1e-12);
    }
  });
  return w.done("excess norm");
}

// ---------------------------------------------------------------- functionals

Outcome convexity(Context&) {
  Worst w;
  sweep(5, 2, 200, [&](const Named& nf, Rng& rng) {
    for (int i = 0; i < 100; ++i) {
      const Signal a = gaussian(5, rng), b = gaussian(5, rng);
      const double lhs = nf.F.evaluate(0.5 * a + 0.5 * b);
      w.add(lhs - 0.5 * nf.F.evaluate(a) - 0.5 * nf.F.evaluate(b), 1e-12);
    }
  });
  return w.done("midpoint excess");
}

Outcome dirichlet_two_is_quadratic(Context&) {
  Worst w;
  for (std::uint64_t s = 0; s < 8; ++s) {
    Rng rng(210 + s);
    auto g = random_graph(7, rng, s % 2);
    const auto D = make_dirichlet_p(g, 2.0);
    const auto Q = make_functional(FunctionalKind::quadratic_form, g);
    for (int i = 0; i < 10; ++i) {
      const Signal u = gaussian(7, rng);
      const double a = D.evaluate(u);
      w.add(std::abs(a - Q.evaluate(u)) / (1 + a), 1e-12);
    }
  }
  return w.done("relative difference");
}

Outcome tv_is_dirichlet_one(Context&) {
  Worst w;
  for (std::uint64_t s = 0; s < 8; ++s) {
    Rng rng(220 + s);
    auto g = random_graph(7, rng, s % 2);
    const auto T = make_graph_tv(g);
    const auto D = make_dirichlet_p(g, 1.0);
    for (int i = 0; i < 10; ++i) {
      const Signal u = gaussian(7, rng);
      w.add(std::abs(T.evaluate(u) - D.evaluate(u)), 0.0);
    }
  }
  return w.done("difference");
}

Outcome lipschitz_distance(Context&) {
  Worst w;
  Rng rng(230);
  for (GridSpec spec : {GridSpec{9, 1, 1.0, BoundaryMode::dirichlet}, GridSpec{5, 4, 0.5, BoundaryMode::dirichlet},
                        GridSpec{17, 1, 0.25, BoundaryMode::dirichlet}}) {
    auto g = build_grid_graph(spec);
    const auto L = make_lipschitz_sup(g);
    const Signal d = oracles::distance_transform(*g);
    w.add(std::abs(L.evaluate(d) - 1.0), 1e-12);
    for (int i = 0; i < 20; ++i) {
      const Signal u = L.to_domain(gaussian(g->node_count(), rng));
      const double J = L.evaluate(u);
      for (std::size_t x = 0; x < u.size(); ++x)
        if (d[x] > 0) w.add(std::abs(u[x]) / d[x] - J, 1e-12 * (1 + J));
    }
  }
  return w.done("excess");
}

// ---------------------------------------------------------------- prox

double sigma_draw(Rng& rng) { return std::uniform_real_distribution<double>(0.05, 2.0)(rng); }

Outcome nonexpansive(Context&) {
  Worst w;
  sweep(5, 3, 300, [&](const Named& nf, Rng& rng) {
    for (int i = 0; i < 10; ++i) {
      const double sigma = sigma_draw(rng);
      const Signal a = gaussian(5, rng), b = a + gaussian(5, rng, i % 2 ? 1e-3 : 1.0);
      const auto pa = prox(nf.F, a, sigma), pb = prox(nf.F, b, sigma);
      const double slack = std::sqrt(2 * pa.gap) + std::sqrt(2 * pb.gap) + 2e-12;
      w.add(nf.F.norm(pa.u - pb.u) - nf.F.norm(nf.F.to_domain(a) - nf.F.to_domain(b)), slack);
    }
  });
  return w.done("expansion");
}

/// max over sampled v of J(u) + <zeta, v - u> - J(v).
double sampled_gap(const FunctionalHandle& F, const Signal& u, const Signal& zeta, Rng& rng) {
  const double J = F.evaluate(u);
  double worst = 0.0;
  for (int i = 0; i < 32; ++i) {
    Signal v = F.to_domain(u + gaussian(u.size(), rng, i % 2 ? 1e-2 : 1.0));
    worst = std::max(worst, J + F.inner(zeta, v - u) - F.evaluate(v));
  }
  return worst;
}

Outcome optimality_certificate(Context&) {
  Worst w;
  sweep(5, 3, 310, [&](const Named& nf, Rng& rng) {
    for (int i = 0; i < 5; ++i) {
      const double sigma = sigma_draw(rng);
      const Signal f = gaussian(5, rng);
      const auto s = prox(nf.F, f, sigma);
      const double eps = 1e-12 + std::sqrt(2 * s.gap) / sigma;
      const double scale = 10 * eps * (1 + nf.F.norm(s.u) + nf.F.norm(s.zeta));
      w.add(euler_residual(nf.F, s.u, s.zeta) / scale, 1.0);
      w.add(sampled_gap(nf.F, s.u, s.zeta, rng) / (scale * 10), 1.0);
    }
  });
  return w.done("ratio to tolerance");
}

Outcome nullspace_equivariance(Context&) {
  Worst w;
  sweep(5, 3, 320, [&](const Named& nf, Rng& rng) {
    if (nf.F.nullspace_basis().empty()) return;
    const double sigma = sigma_draw(rng);
    const Signal f = gaussian(5, rng);
    Signal g = f;
    axpy(2.5, nf.F.nullspace_basis().front(), g);
    const auto a = prox(nf.F, f, sigma), b = prox(nf.F, g, sigma);
    Signal shifted = a.u;
    axpy(2.5, nf.F.nullspace_basis().front(), shifted);
    w.add(nf.F.norm(b.u - shifted), 1e-9 + std::sqrt(2 * a.gap) + std::sqrt(2 * b.gap));
  });
  return w.done("deviation");
}

Outcome prox_mass(Context&) {
  Worst w;
  sweep(5, 3, 330, [&](const Named& nf, Rng& rng) {
    const Signal f = nf.F.to_domain(gaussian(5, rng));
    const auto s = prox(nf.F, f, sigma_draw(rng));
    w.add(nf.F.norm(project_nullspace(nf.F, s.u) - project_nullspace(nf.F, f)), 1e-10);
  });
  return w.done("mass drift");
}

Outcome oracle_equivalence(Context&) {
  Worst w;
  Rng rng(340);
  for (int trial = 0; trial < 2; ++trial)
    for (std::size_t n : {2u, 3u})
      for (const Named& nf : catalog(n, rng, trial == 1)) {
        const Signal f = gaussian(n, rng);
        const double sigma = sigma_draw(rng);
        const auto s = prox(nf.F, f, sigma);
        const Signal r = nf.F.to_domain(f) - project_nullspace(nf.F, nf.F.to_domain(f));
        const double mmin = *std::min_element(nf.F.measure().begin(), nf.F.measure().end());
        const double radius = std::max(2.05 * nf.F.norm(r) / std::sqrt(mmin), 1e-3);
        w.add(norm(s.u - brute_force_prox(nf.F, f, sigma, radius, 6)), 1e-3);
      }
  return w.done("distance to oracle");
}

Outcome continuity(Context&) {
  Worst w;
  sweep(5, 2, 350, [&](const Named& nf, Rng& rng) {
    const Signal f = gaussian(5, rng);
    const double sigma = sigma_draw(rng);
    const Signal u = prox(nf.F, f, sigma).u;
    double prev = INFINITY;
    for (int k = 0; k <= 24; ++k) {
      const double d = nf.F.norm(prox(nf.F, f, sigma * (1 + std::ldexp(1.0, -k))).u - u);
      w.add(d - prev, 1e-8);
      prev = d;
    }
    w.add(prev, 1e-6);
  });
  return w.done("increase or final distance");
}

// ---------------------------------------------------------------- flow

template <class Body>
void flow_sweep(Context& ctx, std::uint64_t base, Body&& body) {
  sweep(6, 2, base, [&](const Named& nf, Rng& rng) {
    FlowOptions o;
    o.stop.max_steps = 60;
    const Signal f = gaussian(6, rng);
    if (nf.F.norm(nf.F.to_domain(f) - project_nullspace(nf.F, nf.F.to_domain(f))) == 0) return;
    body(nf, f, ctx.flow(nf.F, f, o));
  });
}

Outcome flow_mass(Context& ctx) {
  Worst w;
  flow_sweep(ctx, 400, [&](const Named&, const Signal&, const FlowTrace& tr) { w.add(tr.mass_drift, 1e-10); });
  return w.done("mass drift");
}

Outcome flow_energy(Context& ctx) {
  Worst w;
  flow_sweep(ctx, 410, [&](const Named& nf, const Signal&, const FlowTrace& tr) {
    const FlowAudit a = audit_flow(tr, nf.F);
    w.add(double(a.energy_violations), 0.0);
  });
  return w.done("violations per run");
}

Outcome flow_distance(Context& ctx) {
  Worst w;
  flow_sweep(ctx, 420, [&](const Named& nf, const Signal&, const FlowTrace& tr) {
    const FlowAudit a = audit_flow(tr, nf.F);
    w.add(double(a.distance_violations), 0.0);
  });
  return w.done("violations per run");
}

Outcome flow_lambda(Context& ctx) {
  Worst w;
  flow_sweep(ctx, 430, [&](const Named& nf, const Signal&, const FlowTrace& tr) {
    const FlowAudit a = audit_flow(tr, nf.F);
    w.add(double(a.lambda_violations), 0.0);
  });
  return w.done("violations per run");
}

Outcome flow_reconstruction(Context& ctx) {
  Worst w;
  flow_sweep(ctx, 440, [&](const Named& nf, const Signal& f, const FlowTrace& tr) {
    w.add(decompose(tr, nf.F, f).reconstruction_residual - tr.accumulated_gap, 1e-8);
  });
  for (std::uint64_t s = 0; s < 6; ++s) {
    Rng rng(445 + s);
    std::vector<double> m(6);
    for (double& x : m) x = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
    const auto F = make_l1(6, m);
    FlowOptions o;
    o.schedule.kind = ScheduleKind::event_aligned;
    const Signal f = gaussian(6, rng);
    const FlowTrace tr = ctx.flow(F, f, o);
    w.add(decompose(tr, F, f).reconstruction_residual - tr.accumulated_gap, 1e-8);
    for (const EigenCertificate& c : band_eigen_scores(tr, F).certificates) w.add(c.worst(), 1e-8);
  }
  return w.done("excess");
}

Outcome flow_eigen_invariance(Context& ctx) {
  Worst w;
  for (std::size_t n : {4u, 8u, 12u}) {
    const auto F = make_graph_tv(path_graph(n));
    Signal f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = i < n / 2 ? 1.0 : -1.0;
    FlowOptions o;
    o.schedule.tau = double(n) / 2 / 7.5;
    const FlowTrace tr = ctx.flow(F, f, o);
    w.add(tr.max_profile_drift, 1e-8);
  }
  return w.done("profile drift");
}

// ---------------------------------------------------------------- power

template <class Body>
void power_sweep(std::uint64_t base, Body&& body) {
  sweep(6, 3, base, [&](const Named& nf, Rng& rng) {
    for (StepRule rule : {StepRule::constant, StepRule::adaptive})
      for (double c : {0.5, 0.9}) {
        PowerOptions o;
        o.rule = rule;
        o.c = c;
        o.max_iter = 300;
        const EigenPair e = power_method(nf.F, nf.F.to_domain(gaussian(6, rng)), o);
        body(nf, e, audit_power(e, nf.F, o), o);
      }
  });
}

Outcome power_well_defined(Context&) {
  Worst w;
  power_sweep(500, [&](const Named&, const EigenPair&, const PowerAudit& a, const PowerOptions&) {
    w.add(double(a.zero_prox), 0.0);
  });
  return w.done("zero prox count");
}

Outcome power_energy(Context&) {
  Worst w;
  power_sweep(510, [&](const Named&, const EigenPair&, const PowerAudit& a, const PowerOptions&) {
    w.add(double(a.energy_violations), 0.0);
  });
  return w.done("violations per run");
}

Outcome power_sphere(Context&) {
  Worst w;
  power_sweep(520, [&](const Named&, const EigenPair&, const PowerAudit& a, const PowerOptions&) {
    w.add(a.max_sphere_error, 1e-12);
  });
  return w.done("norm error");
}

Outcome power_orthogonality(Context&) {
  Worst w;
  power_sweep(530, [&](const Named&, const EigenPair& e, const PowerAudit&, const PowerOptions&) {
    for (const PowerIterate& it : e.history) w.add(it.nullspace_inner, 1e-10);
  });
  return w.done("inner product");
}

Outcome power_sigma(Context&) {
  Worst w;
  power_sweep(540, [&](const Named&, const EigenPair&, const PowerAudit& a, const PowerOptions& o) {
    if (o.rule == StepRule::adaptive) w.add(double(a.sigma_decreases), 0.0);
  });
  // the path Laplacian satisfies ||u - Pu||^2 <= (2 / lambda_1) J(u)
  for (std::size_t n : {4u, 6u, 10u}) {
    auto g = path_graph(n);
    const auto Q = make_quadratic_form(graph_laplacian(*g));
    const auto spec = oracles::dense_symmetric_eigs(graph_laplacian(*g));
    PowerOptions o;
    o.poincare_constant = 2.0 / spec.eigenvalues[1];
    Rng rng(545 + n);
    const EigenPair e = power_method(Q, gaussian(n, rng), o);
    w.add(double(audit_power(e, Q, o).poincare_violations), 0.0);
  }
  return w.done("violations per run");
}

Outcome power_summability(Context&) {
  Worst w;
  power_sweep(550, [&](const Named&, const EigenPair&, const PowerAudit& a, const PowerOptions&) {
    w.add(a.residual_sum - a.residual_bound, 0.0);
  });
  return w.done("excess over bound");
}

Outcome power_fixed_point(Context&) {
  Worst w;
  power_sweep(560, [&](const Named&, const EigenPair& e, const PowerAudit& a, const PowerOptions& o) {
    if (e.converged) w.add(a.fixed_point_residual / o.tol, 10.0);
  });
  return w.done("residual / tol");
}

// ---------------------------------------------------------------- oracles

Outcome jacobi_reconstruction(Context&) {
  Worst w;
  Rng rng(600);
  for (std::size_t n : {3u, 8u, 15u}) {
    DenseMatrix A(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) A(i, j) = A(j, i) = gaussian(1, rng)[0];
    std::vector<double> m(n);
    for (double& x : m) x = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
    for (bool weighted : {false, true}) {
      const auto s = oracles::dense_symmetric_eigs(A, weighted ? std::span<const double>(m) : std::span<const double>());
      // A = M V Lambda V^T M with V^T M V = I
      DenseMatrix R(n, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          double x = 0.0;
          for (std::size_t k = 0; k < n; ++k) x += s.eigenvectors[k][i] * s.eigenvalues[k] * s.eigenvectors[k][j];
          R(i, j) = A(i, j) - (weighted ? m[i] * m[j] : 1.0) * x;
        }
      w.add(R.frobenius_norm() / A.frobenius_norm(), 1e-9);
    }
  }
  return w.done("relative residual");
}

Outcome heat_semigroup(Context&) {
  Worst w;
  Rng rng(610);
  for (std::size_t n : {5u, 12u}) {
    auto g = random_graph(n, rng, false);
    std::vector<double> m(g->node_measure().begin(), g->node_measure().end());
    const auto s = oracles::dense_symmetric_eigs(graph_laplacian(*g), m);
    const Signal f = gaussian(n, rng);
    for (auto [t, h] : {std::pair{0.3, 0.2}, std::pair{1.0, 2.5}}) {
      const Signal a = oracles::linear_heat_solution(s, f, t + h);
      const Signal b = oracles::linear_heat_solution(s, oracles::linear_heat_solution(s, f, t), h);
      w.add(norm(a - b, m), 1e-10);
    }
  }
  return w.done("deviation");
}

Outcome eikonal(Context&) {
  Worst w;
  for (GridSpec spec : {GridSpec{6, 5, 0.5, BoundaryMode::dirichlet}, GridSpec{11, 1, 0.25, BoundaryMode::dirichlet},
                        GridSpec{4, 7, 1.0, BoundaryMode::dirichlet}}) {
    auto g = build_grid_graph(spec);
    const Signal d = oracles::distance_transform(*g);
    for (std::size_t x = 0; x < g->node_count(); ++x) {
      if (g->is_boundary(x)) continue;
      double best = INFINITY;
      for (const auto& nb : g->neighbors(x)) best = std::min(best, d[nb.node] + 1.0 / g->edges()[nb.edge].w);
      w.add(std::abs(best - d[x]), 1e-12 * (1 + d[x]));
    }
  }
  return w.done("deviation");
}

Outcome profile_ode(Context&) {
  Worst w;
  const double h = 1e-6;
  for (double p : {1.0, 1.5, 2.0, 3.0})
    for (double lambda : {0.5, 2.0})
      for (double t = 0.05; t < 3.0; t += 0.1) {
        const double a = oracles::eigen_profile(lambda, p, t);
        if (oracles::eigen_profile(lambda, p, t + h) <= 0.0) continue;
        const double da = (oracles::eigen_profile(lambda, p, t + h) - oracles::eigen_profile(lambda, p, t - h)) / (2 * h);
        w.add(std::abs(da + lambda * std::pow(a, p - 1)), 1e-4);
      }
  return w.done("ODE residual");
}

// ---------------------------------------------------------------- cli

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("nlspec_validate_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Differences between two output trees, ignoring nothing.
std::size_t tree_differences(const fs::path& a, const fs::path& b) {
  std::size_t diff = 0;
  std::vector<fs::path> fa, fb;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) fa.push_back(fs::relative(e.path(), a));
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) fb.push_back(fs::relative(e.path(), b));
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  if (fa != fb) return 1 + std::max(fa.size(), fb.size());
  for (const auto& f : fa) {
    if (f.filename() == "manifest.json") {
      // the output directory itself is echoed in the manifest
      auto ma = nlohmann::json::parse(slurp(a / f)), mb = nlohmann::json::parse(slurp(b / f));
      ma["resolved"].erase("output_dir");
      mb["resolved"].erase("output_dir");
      diff += ma != mb;
    } else {
      diff += slurp(a / f) != slurp(b / f);
    }
  }
  return diff;
}

nlohmann::json path_quadratic_power(std::size_t n) {
  return {{"command", "power"},
          {"functional", {{"kind", "quadratic_form"}}},
          {"domain", {{"grid", {{"width", n}}}}},
          {"power", {{"restarts", 3}, {"tol", 1e-13}, {"max_iter", 100000}}},
          {"seed", 5}};
}

std::vector<std::vector<double>> read_rows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> r;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) r.push_back(cell == "nan" ? NAN : std::strtod(cell.c_str(), nullptr));
    rows.push_back(r);
  }
  return rows;
}

Outcome round_trip(Context&) {
  Worst w;
  Rng rng(700);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int i = 0; i < 2000; ++i) {
    double x;
    const std::uint64_t b = bits(rng);
    std::memcpy(&x, &b, sizeof x);
    if (!std::isfinite(x)) continue;
    w.add(std::strtod(format_number(x).c_str(), nullptr) == x ? 0.0 : 1.0, 0.0);
  }
  return w.done("mismatch");
}

Outcome byte_identical(Context&) {
  TempDir tmp;
  std::ostringstream log;
  std::size_t diffs = 0;
  const auto power = parse_config(path_quadratic_power(6));
  RunOptions a, b;
  a.output_dir = tmp.path / "a";
  b.output_dir = tmp.path / "b";
  b.threads = 3;
  run_experiment(power, a, log);
  run_experiment(power, b, log);
  diffs += tree_differences(*a.output_dir, *b.output_dir);
  const auto flow = parse_config({{"command", "decompose"},
                                  {"functional", {{"kind", "graph_tv"}}},
                                  {"domain", {{"grid", {{"width", 5}, {"height", 4}}}}},
                                  {"input", {{"generator", "gaussian"}}},
                                  {"flow", {{"max_steps", 40}}},
                                  {"seed", 9}});
  a.output_dir = tmp.path / "c";
  b.output_dir = tmp.path / "d";
  run_experiment(flow, a, log);
  run_experiment(flow, b, log);
  diffs += tree_differences(*a.output_dir, *b.output_dir);
  return {diffs == 0, std::to_string(diffs) + " differing file(s)"};
}

Outcome power_config_matches_oracle(Context&) {
  TempDir tmp;
  std::ostringstream log;
  RunOptions ro;
  ro.output_dir = tmp.path;
  const int status = run_experiment(parse_config(path_quadratic_power(6)), ro, log);
  const auto spec = oracles::dense_symmetric_eigs(graph_laplacian(*path_graph(6)));
  const auto rows = read_rows(tmp.path / "eigen.csv");
  if (status != 0 || rows.empty()) return {false, "run failed"};
  const double err = std::abs(rows.front()[1] - spec.eigenvalues[1]);
  std::ostringstream s;
  s << "lambda error " << std::setprecision(3) << err;
  return {err <= 1e-8, s.str()};
}

Outcome compare_examples(Context&) {
  TempDir tmp;
  std::ostringstream log;
  RunOptions ro;
  ro.output_dir = tmp.path / "run";
  run_experiment(parse_config({{"command", "flow"},
                               {"functional", {{"kind", "graph_tv"}}},
                               {"domain", {{"grid", {{"width", 6}}}}},
                               {"input", {{"values", {1, 1, 1, -1, -1, -1}}}}}),
                 ro, log);
  const fs::path trace = tmp.path / "run" / "trace.csv";
  Tolerances tol;
  tol.fallback = 1e-6;
  bool ok = compare_traces(trace, trace, tol).passed;
  std::string text = slurp(trace);
  std::vector<std::string> lines;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) lines.push_back(l);
  auto cells = [](const std::string& l) {
    std::vector<std::string> c;
    std::stringstream s(l);
    for (std::string x; std::getline(s, x, ',');) c.push_back(x);
    return c;
  };
  auto row = cells(lines[2]);
  row[5] = format_number(std::strtod(row[5].c_str(), nullptr) + 1e-3);
  std::string joined;
  for (std::size_t i = 0; i < row.size(); ++i) joined += (i ? "," : "") + row[i];
  lines[2] = joined;
  {
    std::ofstream out(tmp.path / "perturbed.csv", std::ios::binary);
    for (const auto& l : lines) out << l << '\n';
  }
  const CompareReport r = compare_traces(trace, tmp.path / "perturbed.csv", tol);
  ok = ok && !r.passed && r.failures.size() == 1 && r.failures[0].rfind("row 2 column Lambda", 0) == 0;
  return {ok, r.failures.empty() ? "perturbation missed" : r.failures[0]};
}

Outcome eigen_input_lambda_constant(Context&) {
  Worst w;
  TempDir tmp;
  std::ostringstream log;
  const std::vector<nlohmann::json> configs{
      {{"command", "flow"},
       {"functional", {{"kind", "quadratic_form"}}},
       {"domain", {{"grid", {{"width", 10}}}}},
       {"input", {{"generator", "eigenvector"}}},
       {"flow", {{"max_steps", 50}}}},
      {{"command", "flow"},
       {"functional", {{"kind", "graph_tv"}}},
       {"domain", {{"grid", {{"width", 8}}}}},
       {"input", {{"values", {1, 1, 1, 1, -1, -1, -1, -1}}}}}};
  for (std::size_t i = 0; i < configs.size(); ++i) {
    RunOptions ro;
    ro.profile = true;
    ro.output_dir = tmp.path / std::to_string(i);
    run_experiment(parse_config(configs[i]), ro, log);
    const auto rows = read_rows(*ro.output_dir / "trace.csv");
    const double L0 = rows.front()[5];
    for (const auto& r : rows)
      if (r[4] > 1e-8 * rows.front()[4]) w.add(std::abs(r[5] - L0), 1e-8);
  }
  return w.done("Lambda deviation");
}

const std::vector<Check>& registry() {
  static const std::vector<Check> checks{
      {"core", "homogeneity", homogeneity},
      {"core", "nonnegativity", nonnegativity},
      {"core", "nullspace_invariance", nullspace_invariance},
      {"core", "projection_orthogonality", projection_orthogonality},
      {"core", "rayleigh_scale_invariance", rayleigh_scale},
      {"core", "min_norm_subgradient", min_norm_subgradient_check},
      {"core", "min_norm_minimality", minimality},
      {"functionals", "convexity", convexity},
      {"functionals", "dirichlet_p2_is_quadratic", dirichlet_two_is_quadratic},
      {"functionals", "tv_is_dirichlet_p1", tv_is_dirichlet_one},
      {"functionals", "lipschitz_distance", lipschitz_distance},
      {"prox", "nonexpansive", nonexpansive},
      {"prox", "optimality_certificate", optimality_certificate},
      {"prox", "nullspace_equivariance", nullspace_equivariance},
      {"prox", "mass_conservation", prox_mass},
      {"prox", "oracle_equivalence", oracle_equivalence},
      {"prox", "continuity_in_sigma", continuity},
      {"flow", "mass_conservation", flow_mass},
      {"flow", "energy_monotone", flow_energy},
      {"flow", "distance_monotone", flow_distance},
      {"flow", "lambda_monotone", flow_lambda},
      {"flow", "reconstruction", flow_reconstruction},
      {"flow", "eigenvector_invariance", flow_eigen_invariance},
      {"power", "well_defined", power_well_defined},
      {"power", "energy_monotone", power_energy},
      {"power", "unit_sphere", power_sphere},
      {"power", "nullspace_orthogonality", power_orthogonality},
      {"power", "adaptive_sigma", power_sigma},
      {"power", "residual_summability", power_summability},
      {"power", "fixed_point", power_fixed_point},
      {"oracles", "jacobi_reconstruction", jacobi_reconstruction},
      {"oracles", "heat_semigroup", heat_semigroup},
      {"oracles", "distance_eikonal", eikonal},
      {"oracles", "profile_ode", profile_ode},
      {"cli", "round_trip_17_digits", round_trip},
      {"cli", "byte_identical_outputs", byte_identical},
      {"cli", "power_matches_oracle", power_config_matches_oracle},
      {"cli", "compare_examples", compare_examples},
      {"cli", "eigen_input_lambda_constant", eigen_input_lambda_constant},
  };
  return checks;
}

}  // namespace

bool ValidationReport::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
}

ValidationReport run_validation(std::string_view filter, std::size_t threads) {
  std::vector<const Check*> selected;
  for (const Check& c : registry()) {
    const std::string key = std::string(c.section) + "/" + c.name;
    if (filter.empty() || key.find(filter) != std::string::npos) selected.push_back(&c);
  }
  Context ctx;
  ValidationReport rep;
  rep.checks.resize(selected.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < selected.size(); i = next++) {
      ValidationCheck& out = rep.checks[i];
      out.section = selected[i]->section;
      out.name = selected[i]->name;
      try {
        const Outcome o = selected[i]->run(ctx);
        out.passed = o.passed;
        out.detail = o.detail;
      } catch (const std::exception& e) {
        out.passed = false;
        out.detail = std::string("threw: ") + e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::max<std::size_t>(threads, 1); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  rep.flows = ctx.ledger;
  if (ctx.ledger.runs > 0) {
    std::ostringstream s;
    s << ctx.ledger.runs << " flows, worst mass drift " << std::setprecision(3) << ctx.ledger.worst_mass_drift
      << ", Lambda violations " << ctx.ledger.lambda_violations << ", worst Lambda rise "
      << ctx.ledger.worst_lambda_increase;
    rep.checks.push_back({"flow", "suite_runs_audit",
                          ctx.ledger.mass_violations == 0 && ctx.ledger.lambda_violations == 0, s.str()});
  }
  return rep;
}

void print_validation_table(const ValidationReport& rep, std::ostream& out) {
  std::size_t width = 0;
  for (const ValidationCheck& c : rep.checks) width = std::max(width, c.section.size() + c.name.size() + 1);
  std::size_t failed = 0;
  for (const ValidationCheck& c : rep.checks) {
    const std::string key = c.section + "/" + c.name;
    out << (c.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(int(width)) << key << "  " << c.detail << '\n';
    failed += !c.passed;
  }
  out << rep.checks.size() - failed << "/" << rep.checks.size() << " checks passed\n";
}

}  // namespace nlspec::cli
