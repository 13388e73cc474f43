#include "nlspec/power.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "nlspec/error.hpp"
#include "nlspec/prox.hpp"

namespace nlspec {
namespace {

double nullspace_inner(const FunctionalHandle& F, const Signal& w) {
  double s = 0.0;
  for (const Signal& b : F.nullspace_basis()) s = std::max(s, std::abs(F.inner(w, b)));
  return s;
}

Signal normalized_off_nullspace(const FunctionalHandle& F, const Signal& x) {
  Signal r = x - project_nullspace(F, x);
  const double n = F.norm(r);
  if (n < nullspace_floor(x.size())) throw NullspaceStart("start lies in the nullspace");
  r *= 1.0 / n;
  return r;
}

double step_for(const PowerOptions& o, double J0, double Jk) { return o.c / (o.rule == StepRule::constant ? J0 : Jk); }

}  // namespace

StepRule parse_step_rule(std::string_view name) {
  if (name == "constant") return StepRule::constant;
  if (name == "adaptive") return StepRule::adaptive;
  throw BadParams("unknown step rule '" + std::string(name) + "'");
}

std::string_view to_string(StepRule rule) noexcept { return rule == StepRule::constant ? "constant" : "adaptive"; }

EigenPair power_method(const FunctionalHandle& F, const Signal& start, const PowerOptions& o) {
  require_size(start, F.dimension(), "power_method");
  if (!(o.c > 0.0 && o.c < 1.0)) throw BadParams("power method needs 0 < c < 1");
  const double p = F.degree();
  const double floor = nullspace_floor(start.size());
  Signal w = normalized_off_nullspace(F, F.to_domain(start));
  const double J0 = F.evaluate(w);
  if (!(J0 > floor)) throw DegenerateEnergy("J vanishes at the normalized start");

  EigenPair out;
  std::vector<Signal> tail;
  std::vector<double> warm;
  Signal v;
  ProxOptions po;
  po.tol = o.prox_tol;
  for (std::size_t k = 0;; ++k) {
    const double Jk = F.evaluate(w);
    if (o.rule == StepRule::adaptive && !(Jk > floor))
      throw DegenerateEnergy("J(w_k) fell below the floor at iteration " + std::to_string(k));
    const double sigma = step_for(o, J0, Jk);
    po.warm_dual = warm.empty() ? nullptr : &warm;
    ProxSolution s = prox(F, w, sigma, po);
    if (!s.converged) out.prox_converged = false;
    if (!s.dual.empty()) warm = s.dual;
    v = std::move(s.u);
    const double vn = F.norm(v);

    PowerIterate it;
    it.J = Jk;
    it.sigma = sigma;
    it.v_norm = vn;
    it.residual = vn - F.inner(v, w);
    it.gap = s.gap;
    it.w_norm = F.norm(w);
    it.nullspace_inner = nullspace_inner(F, w);
    Signal dv = v;
    axpy(-vn, w, dv);
    it.fixed_point = F.norm(dv);
    out.history.push_back(it);
    tail.push_back(w);
    if (tail.size() > 10) tail.erase(tail.begin());

    out.sigma = sigma;
    out.iterations = k + 1;
    if (it.residual <= o.tol && it.fixed_point <= o.tol) {
      out.converged = true;
      break;
    }
    if (vn == 0.0 || k + 1 >= o.max_iter) break;
    w = normalized_off_nullspace(F, v);
  }

  out.w = w;
  out.mu = F.norm(v);
  out.lambda = out.mu > 0.0 ? (1.0 - out.mu) / (out.sigma * std::pow(out.mu, p - 1.0)) : INFINITY;
  out.rayleigh = p * F.evaluate(w);
  Signal r = v;
  axpy(-out.mu, w, r);
  out.residual = F.norm(r);
  for (std::size_t a = 0; a < tail.size(); ++a)
    for (std::size_t b = a + 1; b < tail.size(); ++b) out.oscillation = std::max(out.oscillation, F.norm(tail[a] - tail[b]));
  if (std::isfinite(out.lambda))
    out.certificate = eigen_certificate(F, w, out.lambda, o.certificate_samples, o.certificate_seed);
  return out;
}

Signal power_start(const FunctionalHandle& F, std::size_t index, std::uint64_t seed) {
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + index);
  std::normal_distribution<double> g;
  Signal s(F.dimension());
  for (double& x : s) x = index == 0 ? 1.0 + 1e-2 * g(rng) : g(rng);
  return F.to_domain(s);
}

GroundStateResult ground_state_search(const FunctionalHandle& F, std::size_t restarts, std::uint64_t seed,
                                      const PowerOptions& o, std::size_t threads) {
  if (restarts < 1) throw BadParams("ground_state_search needs at least one restart");
  const std::size_t starts = restarts + 1;
  std::vector<std::optional<EigenPair>> pairs(starts);
  std::vector<std::string> errors(starts);
  std::vector<std::exception_ptr> raised(starts);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < starts; i = next++) {
      try {
        EigenPair e = power_method(F, power_start(F, i, seed), o);
        e.start_index = i;
        pairs[i] = std::move(e);
      } catch (const Error& err) {
        errors[i] = "start " + std::to_string(i) + ": " + err.what();
        raised[i] = std::current_exception();
      }
    }
  };
  const std::size_t nthreads = std::clamp<std::size_t>(threads, 1, starts);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  GroundStateResult res;
  for (std::size_t i = 0; i < starts; ++i) {
    if (pairs[i]) res.all.push_back(std::move(*pairs[i]));
    if (!errors[i].empty()) res.failures.push_back(errors[i]);
  }
  if (res.all.empty()) {
    for (auto& e : raised)
      if (e) std::rethrow_exception(e);
  }
  std::sort(res.all.begin(), res.all.end(), [](const EigenPair& a, const EigenPair& b) {
    return a.rayleigh != b.rayleigh ? a.rayleigh < b.rayleigh : a.start_index < b.start_index;
  });
  res.best = res.all.front();
  res.lambda_min = INFINITY;
  res.lambda_max = -INFINITY;
  for (const EigenPair& e : res.all) {
    res.lambda_min = std::min(res.lambda_min, e.lambda);
    res.lambda_max = std::max(res.lambda_max, e.lambda);
  }
  return res;
}

PowerAudit audit_power(const EigenPair& pair, const FunctionalHandle& F, const PowerOptions& o) {
  PowerAudit a;
  const double p = F.degree();
  const auto& h = pair.history;
  double C = 0.0;
  double neg = 0.0;
  double gaps = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const PowerIterate& it = h[k];
    const double se = std::abs(it.w_norm - 1.0);
    a.max_sphere_error = std::max(a.max_sphere_error, se);
    if (se > 1e-12) ++a.sphere_violations;
    if (it.nullspace_inner > 1e-10) ++a.orthogonality_violations;
    if (!(it.v_norm > 0.0)) ++a.zero_prox;
    if (o.poincare_constant && o.rule == StepRule::adaptive && it.sigma > o.c * *o.poincare_constant * (1.0 + 1e-12))
      ++a.poincare_violations;
    const double scale = it.sigma * std::pow(it.v_norm, p);
    C = std::max(C, scale);
    a.residual_sum += it.residual;
    gaps += it.gap;
    if (k + 1 < h.size()) {
      const PowerIterate& nx = h[k + 1];
      const double tol = (scale > 0.0 ? it.gap / scale : 0.0) + 1e-12 * (1.0 + it.J);
      if (nx.J > it.J + tol) ++a.energy_violations;
      neg += std::max(nx.J - it.J, 0.0);
      if (o.rule == StepRule::adaptive && nx.sigma < it.sigma * (1.0 - 1e-12)) ++a.sigma_decreases;
    }
  }
  if (!h.empty()) {
    const double drop = h.front().J - h.back().J + neg;
    a.residual_bound = C * drop + gaps + 1e-12 * static_cast<double>(h.size());
    a.summable = a.residual_sum <= a.residual_bound;
  }
  const double Jw = F.evaluate(pair.w);
  if (Jw > 0.0) {
    const double sigma_w = o.rule == StepRule::constant ? pair.sigma : o.c / Jw;
    ProxOptions po;
    po.tol = o.prox_tol;
    Signal r = prox(F, pair.w, sigma_w, po).u;
    axpy(-pair.mu, pair.w, r);
    a.fixed_point_residual = F.norm(r);
  }
  return a;
}

}  // namespace nlspec
