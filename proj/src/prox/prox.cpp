#include "nlspec/prox.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "internal.hpp"
#include "nlspec/diagnostics.hpp"
#include "nlspec/error.hpp"

namespace nlspec {
namespace {

void finish(ProxSolution& s, const Signal& f, double sigma) {
  s.zeta = Signal(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) s.zeta[i] = (f[i] - s.u[i]) / sigma;
}

ProxSolution prox_l1(const FunctionalHandle& F, const Signal& f, double sigma) {
  ProxSolution s;
  s.u = Signal(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a = std::abs(f[i]) - sigma;
    s.u[i] = a > 0.0 ? std::copysign(a, f[i]) : 0.0;
  }
  finish(s, f, sigma);
  s.converged = true;
  (void)F;
  return s;
}

ProxSolution prox_linf(const FunctionalHandle& F, const Signal& f, double sigma) {
  ProxSolution s;
  const double theta = detail::l1_threshold(f.values(), F.measure(), sigma);
  s.u = Signal(f.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) mass += F.measure()[i] * std::abs(f[i]);
  if (mass > sigma)
    for (std::size_t i = 0; i < f.size(); ++i) s.u[i] = std::clamp(f[i], -theta, theta);
  finish(s, f, sigma);
  s.converged = true;
  return s;
}

// Normals of the hyperplanes where J is not differentiable, in free coordinates.
std::vector<std::vector<double>> kink_normals(const FunctionalHandle& F, const std::vector<std::size_t>& free) {
  const std::size_t d = free.size();
  std::vector<std::size_t> slot(F.dimension(), d);
  for (std::size_t a = 0; a < d; ++a) slot[free[a]] = a;
  std::vector<std::vector<double>> out;
  auto unit = [&](std::size_t node, double s, std::vector<double>& v) {
    if (slot[node] < d) v[slot[node]] += s;
  };
  std::vector<std::vector<double>> diffs;
  if (F.graph())
    for (const Edge& e : F.graph()->edges()) {
      std::vector<double> v(d, 0.0);
      unit(e.j, e.w, v);
      unit(e.i, -e.w, v);
      diffs.push_back(v);
    }
  switch (F.kind()) {
    case FunctionalKind::graph_tv:
    case FunctionalKind::dirichlet_p: out = diffs; break;
    case FunctionalKind::lipschitz_sup:
      out = diffs;
      for (std::size_t x = 0; x < diffs.size(); ++x)
        for (std::size_t y = x + 1; y < diffs.size(); ++y)
          for (double s : {1.0, -1.0}) {
            std::vector<double> v(d);
            for (std::size_t c = 0; c < d; ++c) v[c] = diffs[x][c] + s * diffs[y][c];
            out.push_back(v);
          }
      break;
    case FunctionalKind::linf:
      for (std::size_t x = 0; x < d; ++x)
        for (std::size_t y = x + 1; y < d; ++y)
          for (double s : {1.0, -1.0}) {
            std::vector<double> v(d, 0.0);
            v[x] = 1.0;
            v[y] = s;
            out.push_back(v);
          }
      break;
    default: break;
  }
  return out;
}

// Orthonormal frames (row-major, one basis vector per row): the axes, then
// one frame per set of at most d - 1 kink normals.
std::vector<std::vector<double>> kink_frames(const FunctionalHandle& F, const std::vector<std::size_t>& free) {
  const std::size_t d = free.size();
  std::vector<std::vector<double>> frames;
  std::vector<double> axes(d * d, 0.0);
  for (std::size_t a = 0; a < d; ++a) axes[a * d + a] = 1.0;
  frames.push_back(axes);
  if (d < 2) return frames;
  const auto normals = kink_normals(F, free);
  auto build = [&](std::vector<std::vector<double>> seed) {
    for (std::size_t a = 0; a < d; ++a) {
      std::vector<double> e(d, 0.0);
      e[a] = 1.0;
      seed.push_back(e);
    }
    std::vector<double> Q;
    std::size_t rows = 0;
    for (auto& v : seed) {
      for (std::size_t b = 0; b < rows; ++b) {
        double pr = 0.0;
        for (std::size_t c = 0; c < d; ++c) pr += v[c] * Q[b * d + c];
        for (std::size_t c = 0; c < d; ++c) v[c] -= pr * Q[b * d + c];
      }
      double nv = 0.0;
      for (double x : v) nv += x * x;
      nv = std::sqrt(nv);
      if (nv < 1e-8) continue;
      for (double x : v) Q.push_back(x / nv);
      if (++rows == d) break;
    }
    frames.push_back(std::move(Q));
  };
  for (std::size_t x = 0; x < normals.size(); ++x) {
    build({normals[x]});
    if (d >= 3)
      for (std::size_t y = x + 1; y < normals.size(); ++y) build({normals[x], normals[y]});
  }
  return frames;
}

}  // namespace

ProxSolution prox(const FunctionalHandle& F, const Signal& input, double sigma, const ProxOptions& options) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw BadStep("prox step must be positive and finite, got " + std::to_string(sigma));
  require_size(input, F.dimension(), "prox");
  if (!input.all_finite()) throw NonFiniteValue("prox input");
  const Signal f = F.to_domain(input);
  ProxSolution s;
  switch (F.kind()) {
    case FunctionalKind::l1: s = prox_l1(F, f, sigma); break;
    case FunctionalKind::linf: s = prox_linf(F, f, sigma); break;
    case FunctionalKind::quadratic_form: s = detail::prox_quadratic(F, f, sigma, options); break;
    case FunctionalKind::graph_tv:
    case FunctionalKind::lipschitz_sup: s = detail::prox_edge_dual(F, f, sigma, options); break;
    case FunctionalKind::dirichlet_p:
      if (F.degree() == 1.0)
        s = detail::prox_edge_dual(F, f, sigma, options);
      else if (F.degree() == 2.0)
        s = detail::prox_quadratic(F, f, sigma, options);
      else
        s = detail::prox_dirichlet_newton(F, f, sigma, options);
      break;
  }
  return s;
}

ProxSolution prox(const FunctionalHandle& F, const Signal& f, double sigma, double tol, std::size_t max_iter) {
  ProxOptions o;
  o.tol = tol;
  o.max_iter = max_iter;
  return prox(F, f, sigma, o);
}

double prox_objective(const FunctionalHandle& F, const Signal& input, double sigma, const Signal& candidate) {
  const Signal f = F.to_domain(input);
  const Signal u = F.to_domain(candidate);
  const Signal d = u - f;
  return 0.5 * F.inner(d, d) + sigma * F.evaluate(u);
}

Signal brute_force_prox(const FunctionalHandle& F, const Signal& input, double sigma, double radius,
                        std::size_t levels, std::size_t half_points) {
  require_size(input, F.dimension(), "brute_force_prox");
  const Signal f = F.to_domain(input);
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!(F.graph() && F.graph()->is_boundary(i))) free.push_back(i);
  const std::size_t d = free.size();
  if (d > 4) throw DimensionTooLarge("brute-force prox supports at most 4 free coordinates, got " + std::to_string(d));
  const std::size_t K = half_points ? half_points : (d <= 3 ? 20 : 10);

  const auto m = F.measure();
  auto objective = [&](const Signal& u) {
    double fit = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      const std::size_t i = free[a];
      fit += m[i] * (u[i] - f[i]) * (u[i] - f[i]);
    }
    return 0.5 * fit + sigma * F.evaluate(u);
  };
  Signal best = f;
  double best_val = objective(best);
  const std::vector<std::vector<double>> frames = kink_frames(F, free);
  std::vector<double> offset(d);

  double r = radius;
  for (std::size_t level = 0; level < levels; ++level) {
    const double h = r / static_cast<double>(K);
    // Re-centre until the centre wins in every frame. Non-axis frames put the
    // kinks of J on lattice planes, so the box can follow the valleys they form.
    std::size_t frame = 0;
    std::size_t failures = 0;
    for (int round = 0; round < 400 && failures < frames.size(); ++round) {
      const std::vector<double>& Q = frames[frame];
      // rotated frames only need to track valleys: a coarser lattice suffices
      const std::size_t k_here = frame == 0 ? K : std::max<std::size_t>(K / 2, 2);
      const std::size_t side_here = 2 * k_here + 1;
      std::size_t total_here = 1;
      for (std::size_t a = 0; a < d; ++a) total_here *= side_here;
      const Signal center = best;
      Signal trial = center;
      for (std::size_t idx = 0; idx < total_here; ++idx) {
        std::size_t rest = idx;
        for (std::size_t a = 0; a < d; ++a) {
          offset[a] = (static_cast<double>(rest % side_here) - static_cast<double>(k_here)) * h;
          rest /= side_here;
        }
        for (std::size_t c = 0; c < d; ++c) {
          double x = center[free[c]];
          for (std::size_t a = 0; a < d; ++a) x += offset[a] * Q[a * d + c];
          trial[free[c]] = x;
        }
        const double v = objective(trial);
        if (v < best_val) {
          best_val = v;
          best = trial;
        }
      }
      if (best == center) {
        ++failures;
        frame = (frame + 1) % frames.size();
      } else {
        failures = 0;
      }
    }
    r /= 10.0;
  }
  return best;
}

double prox_nonvanishing_bound(const FunctionalHandle& F, const Signal& input) {
  const Signal f = F.to_domain(input);
  const double J = F.evaluate(f);
  if (!(J > 0.0)) throw NullspaceElement("prox bound undefined for J(f) = 0");
  const Signal r = f - project_nullspace(F, f);
  return F.inner(r, r) / J;
}

}  // namespace nlspec
