#include "nlspec/flow.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "nlspec/error.hpp"
#include "nlspec/prox.hpp"

namespace nlspec {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Step to the next breakpoint of the closed-form flow (l1 / linf), infinity otherwise.
double next_event(const FunctionalHandle& F, const Signal& u) {
  const auto m = F.measure();
  if (F.kind() == FunctionalKind::l1) {
    double best = INFINITY;
    for (double x : u)
      if (x != 0.0) best = std::min(best, std::abs(x));
    return best;
  }
  if (F.kind() == FunctionalKind::linf) {
    const double top = max_abs(u);
    if (top == 0.0) return INFINITY;
    const double band = top * (1.0 - 1e-9);
    double next = 0.0;
    for (double x : u)
      if (std::abs(x) < band) next = std::max(next, std::abs(x));
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += m[i] * std::max(std::abs(u[i]) - next, 0.0);
    return s;
  }
  return INFINITY;
}

double gershgorin_quadratic(const FunctionalHandle& F) {
  const auto m = F.measure();
  double best = 0.0;
  if (F.matrix()) {
    const DenseMatrix& A = *F.matrix();
    for (std::size_t r = 0; r < A.rows(); ++r) {
      double s = 0.0;
      for (double a : A.row(r)) s += std::abs(a);
      best = std::max(best, s / m[r]);
    }
    return best;
  }
  std::vector<double> row(F.dimension(), 0.0);
  for (const Edge& e : F.graph()->edges()) {
    row[e.i] += 2.0 * e.w;
    row[e.j] += 2.0 * e.w;
  }
  for (std::size_t i = 0; i < row.size(); ++i) best = std::max(best, row[i] / m[i]);
  return best;
}

}  // namespace

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "constant") return ScheduleKind::constant;
  if (name == "refine") return ScheduleKind::refine;
  if (name == "event_aligned") return ScheduleKind::event_aligned;
  throw BadParams("unknown schedule '" + std::string(name) + "'");
}

std::string_view to_string(ScheduleKind kind) noexcept {
  switch (kind) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::refine: return "refine";
    case ScheduleKind::event_aligned: return "event_aligned";
  }
  return "constant";
}

double default_step(const FunctionalHandle& F, const Signal& input) {
  const Signal f = F.to_domain(input);
  if (F.evaluate(f) <= 0.0) return 1.0;
  if (F.degree() == 2.0) {
    const double bound = gershgorin_quadratic(F);
    return bound > 0.0 ? 0.1 / bound : 1.0;
  }
  return 0.1 * prox_nonvanishing_bound(F, f);
}

FlowTrace run_flow(const FunctionalHandle& F, const Signal& input, const FlowOptions& options) {
  require_size(input, F.dimension(), "run_flow");
  if (!input.all_finite()) throw NonFiniteValue("run_flow datum");
  const StepSchedule& sched = options.schedule;
  const StopCriteria& stop = options.stop;
  if (sched.tau < 0.0 || !std::isfinite(sched.tau)) throw BadStep("flow step must be positive");

  FlowTrace tr;
  tr.degree = F.degree();
  tr.schedule = sched.kind;
  tr.f = F.to_domain(input);
  tr.u_infinity = project_nullspace(F, tr.f);
  const double p = F.degree();
  const double floor = nullspace_floor(tr.f.size());
  const double tau0 = sched.tau > 0.0 ? sched.tau : default_step(F, tr.f);
  const double tau_min = sched.tau_min > 0.0 ? sched.tau_min : tau0 * std::ldexp(1.0, -20);
  tr.resolved_tau = tau0;

  Signal u = tr.f;
  const double dist0 = F.norm(u - tr.u_infinity);
  tr.profile_floor = std::max(floor, stop.extinction_tol * dist0);
  Signal w0;
  auto remember = [&](const Signal& x) {
    if (options.store_iterates) tr.iterates.push_back(x);
    tr.recent.push_back(x);
    while (tr.recent.size() > std::max<std::size_t>(options.ring_size, 1)) tr.recent.pop_front();
  };

  FlowStep rec;
  rec.J = F.evaluate(u);
  rec.dist = dist0;
  rec.Lambda = dist0 > floor ? p * rec.J / std::pow(dist0, p) : 0.0;
  rec.zeta_norm = kNaN;
  rec.profile_residual = kNaN;
  tr.steps.push_back(rec);
  tr.zetas.emplace_back();
  remember(u);
  if (dist0 > floor) {
    w0 = (1.0 / dist0) * (u - tr.u_infinity);
    tr.w_last = w0;
  } else {
    tr.extinction_index = 0;
    tr.w_last = Signal(u.size());
    tr.u_last = u;
    return tr;
  }

  std::vector<double> warm;
  double tau_cur = tau0;
  double t = 0.0;
  for (std::size_t k = 1; k <= stop.max_steps; ++k) {
    const double remaining = stop.time_horizon - t;
    if (std::isfinite(remaining) && remaining <= 1e-12 * std::max(1.0, std::abs(stop.time_horizon))) break;

    double tau = std::min(tau_cur, remaining);
    if (sched.kind == ScheduleKind::event_aligned) tau = std::min(tau, next_event(F, u));

    ProxOptions po;
    po.tol = options.prox_tol;
    po.max_iter = options.prox_max_iter;
    po.warm_dual = warm.empty() ? nullptr : &warm;
    ProxSolution s;
    int retries = 0;
    for (;;) {
      s = prox(F, u, tau, po);
      if (!s.converged && retries < 3) {
        ++retries;
        tau *= 0.5;
        continue;
      }
      if (sched.kind == ScheduleKind::refine && tau > tau_min &&
          F.norm(s.u - tr.u_infinity) <= stop.extinction_tol * dist0) {
        tau = std::max(0.5 * tau, tau_min);
        tau_cur = tau;
        continue;
      }
      break;
    }
    if (!s.converged) ++tr.unconverged_steps;
    if (!s.dual.empty()) warm = s.dual;

    t += tau;
    u = std::move(s.u);
    rec = FlowStep{};
    rec.k = k;
    rec.t = t;
    rec.tau = tau;
    rec.J = F.evaluate(u);
    const Signal centred = u - tr.u_infinity;
    rec.dist = F.norm(centred);
    rec.zeta_norm = F.norm(s.zeta);
    rec.gap = s.gap;
    rec.prox_converged = s.converged;
    rec.retries = retries;
    tr.accumulated_gap += s.gap;
    tr.mass_drift = std::max(tr.mass_drift, F.norm(project_nullspace(F, u) - tr.u_infinity));
    if (rec.dist > tr.profile_floor) {
      rec.Lambda = p * rec.J / std::pow(rec.dist, p);
      const Signal w = (1.0 / rec.dist) * centred;
      Signal r = (1.0 / std::pow(rec.dist, p - 1.0)) * s.zeta;
      axpy(-rec.Lambda, w, r);
      rec.profile_residual = F.norm(r);
      tr.max_profile_drift = std::max(tr.max_profile_drift, F.norm(w - w0));
      tr.w_last = w;
    } else {
      rec.Lambda = tr.steps.back().Lambda;
      rec.profile_residual = kNaN;
    }
    tr.steps.push_back(rec);
    tr.zetas.push_back(std::move(s.zeta));
    remember(u);
    if (rec.dist <= stop.extinction_tol * dist0) {
      tr.extinction_index = k;
      break;
    }
  }
  tr.u_last = std::move(u);
  return tr;
}

ExtinctionReport extinction_report(const FlowTrace& trace, const FunctionalHandle& F,
                                   std::optional<double> lambda1, const Signal* candidate,
                                   std::size_t random_directions, std::uint64_t seed) {
  ExtinctionReport rep;
  if (trace.extinction_index) rep.measured = trace.steps[*trace.extinction_index].t;
  const double p = F.degree();
  const Signal g = trace.f - trace.u_infinity;
  const double dist0 = F.norm(g);
  if (p < 2.0 && lambda1 && *lambda1 > 0.0) rep.upper = std::pow(dist0, 2.0 - p) / ((2.0 - p) * *lambda1);
  if (p != 1.0) return rep;

  double best = 0.0;
  auto test = [&](const Signal& raw) {
    const Signal v = F.to_domain(raw);
    const double J = F.evaluate(v);
    if (J > 0.0) best = std::max(best, F.inner(g, v) / J);
  };
  test(g);
  if (candidate) test(*candidate);
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i) {
    Signal e(n);
    e[i] = 1.0;
    test(e);
    e[i] = -1.0;
    test(e);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (std::size_t s = 0; s < random_directions; ++s) {
    Signal v(n);
    for (double& x : v) x = gauss(rng);
    test(v);
  }
  rep.lower = best;
  return rep;
}

EnvelopeReport check_decay_envelopes(const FlowTrace& trace, const FunctionalHandle& F, double lambda1) {
  EnvelopeReport rep;
  const double p = F.degree();
  const auto& st = trace.steps;
  const std::size_t K = st.size();
  const double d0 = st.front().dist;
  const double e = 2.0 - p;
  rep.upper.resize(K);
  rep.lower.assign(K, kNaN);
  for (std::size_t k = 0; k < K; ++k) {
    const double d = st[k].dist;
    const double t = st[k].t;
    double slack;
    if (p < 2.0)
      slack = std::max(std::pow(d0, e) - e * lambda1 * t, 0.0) - std::pow(d, e);
    else if (p == 2.0)
      slack = d0 * d0 * std::exp(-2.0 * lambda1 * t) - d * d;
    else
      slack = 1.0 / (std::pow(d0, e) + (p - 2.0) * lambda1 * t) - std::pow(d, p - 2.0);
    rep.upper[k] = slack;
    rep.worst_upper = std::min(rep.worst_upper, slack);
  }
  if (K > 2) {
    const double d1 = st[1].dist;
    const double t1 = st[1].t;
    const double L1 = st[1].Lambda;
    for (std::size_t k = 2; k < K; ++k) {
      const double d = st[k].dist;
      const double s = st[k].t - t1;
      double slack;
      if (p < 2.0)
        slack = std::pow(d, e) - (std::pow(d1, e) - e * L1 * s);
      else if (p == 2.0)
        slack = d * d - d1 * d1 * std::exp(-2.0 * L1 * s);
      else
        slack = std::pow(d, p - 2.0) - 1.0 / (std::pow(d1, e) + (p - 2.0) * L1 * s);
      rep.lower[k] = slack;
      rep.worst_lower = std::min(rep.worst_lower, slack);
    }
  }
  if (p < 2.0 && trace.extinction_index) {
    const double T = st[*trace.extinction_index].t;
    rep.improved_lower.resize(K);
    rep.improved_upper.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
      const double de = std::pow(st[k].dist, e);
      const double left = st[k].t <= T ? T - st[k].t : 0.0;
      rep.improved_lower[k] = de - e * lambda1 * left;
      rep.improved_upper[k] = e * st[k].Lambda * left - de;
      rep.worst_improved_lower = std::min(rep.worst_improved_lower, rep.improved_lower[k]);
      rep.worst_improved_upper = std::min(rep.worst_improved_upper, rep.improved_upper[k]);
    }
  }
  return rep;
}

Decomposition decompose(const FlowTrace& trace, const FunctionalHandle& F, const Signal& input) {
  Decomposition d;
  const Signal f = F.to_domain(input);
  d.nullspace_part = project_nullspace(F, f);
  d.remainder = trace.u_last - trace.u_infinity;
  Signal sum = d.nullspace_part + d.remainder;
  for (std::size_t k = 1; k < trace.steps.size(); ++k) {
    d.bands.push_back(trace.steps[k].tau * trace.zetas[k]);
    sum += d.bands.back();
  }
  d.reconstruction_residual = F.norm(f - sum);
  return d;
}

BandScores band_eigen_scores(const FlowTrace& trace, const FunctionalHandle& F, std::size_t samples,
                             std::uint64_t seed) {
  if (!F.one_homogeneous()) throw UnsupportedFunctional("band scores require a one-homogeneous functional");
  BandScores out;
  const std::size_t K = trace.steps.size();
  for (std::size_t k = 1; k < K; ++k) {
    const Signal& z = trace.zetas[k];
    const double nz = F.norm(z);
    if (nz <= nullspace_floor(z.size())) {
      out.certificates.push_back({});
      continue;
    }
    out.certificates.push_back(eigen_certificate(F, z, nz, samples, seed + k));
  }
  std::vector<std::size_t> idx;
  if (K > 1) {
    const std::size_t bands = K - 1;
    const std::size_t take = std::min<std::size_t>(bands, 64);
    for (std::size_t j = 0; j < take; ++j) {
      const std::size_t k = 1 + (take == 1 ? 0 : j * (bands - 1) / (take - 1));
      if (idx.empty() || idx.back() != k) idx.push_back(k);
    }
  }
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b)
      for (std::size_t c = b; c < idx.size(); ++c) {
        const Signal diff = trace.zetas[idx[b]] - trace.zetas[idx[a]];
        out.orthogonality_residual =
            std::max(out.orthogonality_residual, std::abs(F.inner(trace.zetas[idx[c]], diff)));
      }
  return out;
}

ProfileReport profile_convergence(const FlowTrace& trace) {
  ProfileReport r;
  r.w_last = trace.w_last;
  for (const FlowStep& s : trace.steps) {
    if (s.dist > trace.profile_floor) r.lambda_last = s.Lambda;
    if (s.k > 0 && std::isfinite(s.profile_residual)) r.profile_residual_history.push_back(s.profile_residual);
  }
  return r;
}

FlowAudit audit_flow(const FlowTrace& trace, const FunctionalHandle& F) {
  FlowAudit a;
  const double p = F.degree();
  const double floor = trace.profile_floor;
  const auto& st = trace.steps;
  for (std::size_t k = 1; k < st.size(); ++k) {
    const FlowStep& prev = st[k - 1];
    const FlowStep& cur = st[k];
    const double G = cur.gap;
    const double energy_tol = G / cur.tau + 1e-12 * (1.0 + prev.J);
    const double de = cur.J - prev.J - energy_tol;
    if (de > 0.0) {
      ++a.energy_violations;
      a.worst_energy_excess = std::max(a.worst_energy_excess, de);
    }
    const double dd = cur.dist - prev.dist - (std::sqrt(2.0 * G) + 1e-12 * (1.0 + prev.dist));
    if (dd > 0.0) {
      ++a.distance_violations;
      a.worst_distance_excess = std::max(a.worst_distance_excess, dd);
    }
    if (prev.dist > floor && cur.dist > floor) {
      const double rise = cur.Lambda - prev.Lambda;
      a.worst_lambda_increase = std::max(a.worst_lambda_increase, rise);
      const double tol = p * G / (cur.tau * std::pow(cur.dist, p)) + 1e-12 * (1.0 + prev.Lambda);
      if (rise > tol) {
        ++a.lambda_violations;
        a.worst_lambda_excess = std::max(a.worst_lambda_excess, rise - tol);
      }
    }
  }
  a.mass_drift = trace.mass_drift;
  return a;
}

}  // namespace nlspec
