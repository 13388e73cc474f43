#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nlspec/cli.hpp"
#include "nlspec/diagnostics.hpp"
#include "nlspec/flow.hpp"
#include "nlspec/functional.hpp"
#include "nlspec/grid.hpp"
#include "nlspec/oracles.hpp"
#include "nlspec/power.hpp"
#include "nlspec/prox.hpp"
#include "support.hpp"

using namespace nlspec;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << " FAILED(" << what << ")";
    }
  }
};

double smallest_nonzero(const oracles::DenseSpectrum& s, std::size_t& index) {
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i)
    if (s.eigenvalues[i] > 1e-9) {
      index = i;
      return s.eigenvalues[i];
    }
  return 0.0;
}

Signal half_step(std::size_t n) {
  Signal s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = i < n / 2 ? 1.0 : -1.0;
  return s;
}

double oracle_radius(const FunctionalHandle& F, const Signal& f) {
  const Signal r = F.to_domain(f) - project_nullspace(F, f);
  const auto m = F.measure();
  const double mmin = *std::min_element(m.begin(), m.end());
  return 2.05 * F.norm(r) / std::sqrt(mmin) + 1e-3;
}

void linear_oracle(Verdict& v) {
  for (std::size_t n : {2u, 6u, 20u}) {
    const auto t0 = Clock::now();
    auto g = path_graph(n);
    const auto Q = make_functional(FunctionalKind::quadratic_form, g, {});
    const auto spec = oracles::dense_symmetric_eigs(graph_laplacian(*g));
    std::size_t i1 = 0;
    const double l1 = smallest_nonzero(spec, i1);
    PowerOptions o;
    o.tol = 1e-14;
    o.max_iter = 200000;
    const EigenPair e = power_method(Q, power_start(Q, 1, n), o);
    const double rel = std::abs(e.lambda - l1) / l1;
    const double cos = std::abs(testing::cosine(e.w, spec.eigenvectors[i1]));
    const double secs = seconds_since(t0);
    v.detail << " n=" << n << ": rel=" << rel << " 1-cos=" << 1 - cos << " " << secs << "s;";
    v.require(rel <= 1e-8, "lambda n=" + std::to_string(n));
    v.require(cos >= 1 - 1e-8, "cosine n=" + std::to_string(n));
    v.require(secs < 5.0, "runtime n=" + std::to_string(n));
  }
}

void heat_flow(Verdict& v) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2);
  auto g = path_graph(20);
  const auto Q = make_functional(FunctionalKind::quadratic_form, g, {});
  const auto spec = oracles::dense_symmetric_eigs(graph_laplacian(*g));
  const Signal f = testing::random_signal(20, rng);
  const double tau = 1e-3;
  FlowOptions o;
  o.schedule.tau = tau;
  o.stop.time_horizon = 1.0;
  o.store_iterates = true;
  const auto tr = run_flow(Q, f, o);
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.iterates.size(); ++k)
    worst = std::max(worst, norm(tr.iterates[k] - oracles::linear_heat_solution(spec, f, tr.steps[k].t)));
  const double bound = 5.0 * tau * spec.eigenvalues.back() * norm(f);
  const double secs = seconds_since(t0);
  v.detail << " steps=" << tr.steps.size() - 1 << " t_end=" << tr.steps.back().t << " error=" << worst
           << " bound=" << bound << " " << secs << "s";
  v.require(std::abs(tr.steps.back().t - 1.0) <= 1e-12, "horizon");
  v.require(worst <= bound, "error");
  v.require(secs < 10.0, "runtime");
}

void distance_ground_state(Verdict& v) {
  const std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t width : {9u, 33u}) {
    const auto t0 = Clock::now();
    auto g = build_grid_graph({width, 1, 1.0, BoundaryMode::dirichlet});
    const auto F = make_lipschitz_sup(g);
    const Signal d = oracles::distance_transform(*g);
    const auto res = ground_state_search(F, 8, 11, {}, threads);
    const double cos = std::abs(testing::cosine(res.best.w, d, F.measure()));
    const double expected = F.evaluate(d) / F.norm(d);
    const double rel = std::abs(res.best.rayleigh - expected) / expected;
    const double secs = seconds_since(t0);
    v.detail << " width=" << width << ": cos=" << cos << " rayleigh=" << res.best.rayleigh << " oracle=" << expected
             << " rel=" << rel << " " << secs << "s;";
    v.require(cos >= 0.99, "cosine width=" + std::to_string(width));
    v.require(rel <= 0.02, "rayleigh width=" + std::to_string(width));
    v.require(secs < 60.0, "runtime width=" + std::to_string(width));
  }
}

void invariance_extinction(Verdict& v) {
  struct Case {
    std::string name;
    FunctionalHandle F;
    Signal f;
  };
  std::vector<Case> cases;
  for (std::size_t n : {4u, 10u, 20u}) cases.push_back({"path" + std::to_string(n), make_graph_tv(path_graph(n)), half_step(n)});
  {
    auto g = build_grid_graph({6, 4, 1.0, BoundaryMode::neumann});
    Signal f(24);
    for (std::size_t i = 0; i < 24; ++i) f[i] = i % 6 < 3 ? 1.0 : -1.0;
    cases.push_back({"grid6x4", make_graph_tv(g), f});
  }
  for (const auto& c : cases) {
    const double d0 = c.F.norm(c.f);
    const double lambda = rayleigh(c.F, c.f);
    const auto cert = eigen_certificate(c.F, (1.0 / d0) * c.f, lambda);
    v.require(cert.worst() <= 1e-12, "certificate " + c.name);
    const double T = d0 / lambda;
    // 0 selects the default step T / 10; 0.037 T does not divide the extinction time
    for (double tau : {0.0, T / 27.0, 0.037 * T}) {
      FlowOptions o;
      o.schedule.tau = tau;
      const auto tr = run_flow(c.F, c.f, o);
      double linear = 0.0;
      for (const auto& s : tr.steps) linear = std::max(linear, std::abs(s.dist - std::max(d0 - lambda * s.t, 0.0)));
      const auto env = check_decay_envelopes(tr, c.F, lambda);
      const double slack = std::min({env.worst_upper, env.worst_lower, env.worst_improved_lower, env.worst_improved_upper});
      const bool extinct = tr.extinction_index.has_value();
      const double measured = extinct ? tr.steps[*tr.extinction_index].t : INFINITY;
      v.detail << " " << c.name << " tau=" << tr.resolved_tau << ": linear=" << linear << " T_ext-T=" << measured - T
               << " slack=" << slack << ";";
      v.require(linear <= 1e-8, "linear decay " + c.name);
      v.require(extinct && std::abs(measured - T) <= tr.resolved_tau, "extinction " + c.name);
      if (tau != 0.037 * T) v.require(slack >= -1e-8, "envelopes " + c.name);
    }
  }
}

void extinction_sandwich(Verdict& v) {
  for (std::size_t n : {8u, 20u}) {
    const auto F = make_graph_tv(path_graph(n));
    const Signal f = half_step(n);
    const double lambda1 = rayleigh(F, f);
    const auto gs = ground_state_search(F, 4, 5);
    v.require(gs.best.rayleigh >= lambda1 - 1e-9, "ground state n=" + std::to_string(n));
    const auto tr = run_flow(F, f);
    const auto rep = extinction_report(tr, F, lambda1, &f);
    const double tau = tr.resolved_tau;
    const bool ok = rep.upper && rep.measured;
    v.detail << " n=" << n << " tau=" << tau;
    if (ok)
      v.detail << ": lower=" << rep.lower << " measured=" << *rep.measured << " upper=" << *rep.upper << ";";
    v.require(ok, "bounds available n=" + std::to_string(n));
    if (!ok) continue;
    const double round = 1e-12 * *rep.upper;
    v.require(*rep.upper - rep.lower <= 2 * tau, "agreement n=" + std::to_string(n));
    v.require(rep.lower <= *rep.measured + round && *rep.measured <= *rep.upper + round, "bracket n=" + std::to_string(n));
  }
}

void power_invariants(Verdict& v) {
  std::size_t runs = 0, energy = 0, sphere = 0, zero = 0, sigma = 0, failures = 0;
  double worst_sphere = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    for (const auto& nf : testing::catalog(6, rng, seed % 2 == 1)) {
      for (StepRule rule : {StepRule::constant, StepRule::adaptive}) {
        for (double c : {0.5, 0.9}) {
          PowerOptions o;
          o.c = c;
          o.rule = rule;
          o.max_iter = 300;
          ++runs;
          try {
            const EigenPair e = power_method(nf.F, nf.F.to_domain(testing::random_signal(6, rng)), o);
            const PowerAudit a = audit_power(e, nf.F, o);
            energy += a.energy_violations;
            sphere += a.sphere_violations;
            zero += a.zero_prox;
            sigma += a.sigma_decreases;
            worst_sphere = std::max(worst_sphere, a.max_sphere_error);
          } catch (const std::exception&) {
            ++failures;
          }
        }
      }
    }
  }
  v.detail << " runs=" << runs << " energy=" << energy << " sphere=" << sphere << " (max " << worst_sphere
           << ") zero_prox=" << zero << " sigma_decreases=" << sigma << " errors=" << failures;
  v.require(energy == 0, "energy");
  v.require(sphere == 0, "sphere");
  v.require(zero == 0, "nonzero prox");
  v.require(sigma == 0, "adaptive sigma");
  v.require(failures == 0, "errors");
}

void prox_oracle(Verdict& v) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> sig(0.05, 2.0);
  double worst = 0.0;
  std::size_t far = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 2 + i % 2;
    const auto cat = testing::catalog(n, rng, (i / 16) % 2 == 1);
    const auto& F = cat[(i / 2) % cat.size()].F;
    const Signal f = testing::random_signal(n, rng);
    const double sigma = sig(rng);
    const auto s = prox(F, f, sigma);
    const double d = norm(s.u - brute_force_prox(F, f, sigma, oracle_radius(F, f), 6));
    worst = std::max(worst, d);
    if (d > 1e-3) ++far;
  }
  double worst_expansion = -INFINITY;
  std::size_t expansions = 0;
  for (int i = 0; i < 500; ++i) {
    const auto cat = testing::catalog(5, rng, i % 3 == 2);
    const auto& F = cat[i % cat.size()].F;
    const double sigma = sig(rng);
    const Signal a = testing::random_signal(5, rng);
    const Signal b = a + testing::random_signal(5, rng, i % 2 ? 1e-3 : 1.0);
    const auto pa = prox(F, a, sigma), pb = prox(F, b, sigma);
    const double excess = F.norm(pa.u - pb.u) - F.norm(F.to_domain(a) - F.to_domain(b));
    worst_expansion = std::max(worst_expansion, excess);
    if (excess > std::sqrt(2 * pa.gap) + std::sqrt(2 * pb.gap) + 2e-12) ++expansions;
  }
  v.detail << " instances=200 worst=" << worst << " pairs=500 worst_excess=" << worst_expansion
           << " violations=" << expansions;
  v.require(far == 0, "oracle");
  v.require(expansions == 0, "nonexpansive");
}

void reconstruction(Verdict& v) {
  std::size_t flows = 0, bad = 0, band_flows = 0, bad_bands = 0;
  double worst_excess = -INFINITY, worst_cert = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(2000 + seed);
    for (const auto& nf : testing::catalog(7, rng, seed % 2 == 1)) {
      const Signal f = testing::random_signal(7, rng);
      FlowOptions o;
      o.stop.max_steps = 200;
      const auto tr = run_flow(nf.F, f, o);
      const auto dec = decompose(tr, nf.F, f);
      ++flows;
      const double excess = dec.reconstruction_residual - (1e-8 + tr.accumulated_gap);
      worst_excess = std::max(worst_excess, excess);
      if (excess > 0) ++bad;
    }
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(3000 + seed);
    const std::size_t n = 3 + seed % 6;
    std::vector<double> m(n);
    std::uniform_real_distribution<double> w(0.5, 2.0);
    for (double& x : m) x = seed % 2 ? w(rng) : 1.0;
    const auto F = make_l1(n, m);
    const Signal f = testing::random_signal(n, rng);
    FlowOptions o;
    o.schedule.kind = ScheduleKind::event_aligned;
    const auto tr = run_flow(F, f, o);
    const auto dec = decompose(tr, F, f);
    ++flows;
    ++band_flows;
    const double excess = dec.reconstruction_residual - (1e-8 + tr.accumulated_gap);
    worst_excess = std::max(worst_excess, excess);
    if (excess > 0) ++bad;
    double cert = 0.0;
    for (const auto& c : band_eigen_scores(tr, F).certificates) cert = std::max(cert, c.worst());
    worst_cert = std::max(worst_cert, cert);
    if (cert > 1e-8) ++bad_bands;
  }
  v.detail << " flows=" << flows << " worst residual-bound=" << worst_excess << " l1 flows=" << band_flows
           << " worst band certificate=" << worst_cert;
  v.require(bad == 0, "reconstruction");
  v.require(bad_bands == 0, "band certificates");
}

void validation_ledger(Verdict& v) {
  const std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  const auto rep = cli::run_validation({}, threads);
  std::size_t failed = 0;
  for (const auto& c : rep.checks) failed += !c.passed;
  const auto& l = rep.flows;
  v.detail << " checks=" << rep.checks.size() << " failed=" << failed << " flows=" << l.runs
           << " mass_violations=" << l.mass_violations << " worst_mass_drift=" << l.worst_mass_drift
           << " lambda_violations=" << l.lambda_violations << " worst_lambda_excess=" << l.worst_lambda_excess
           << " worst_lambda_increase=" << l.worst_lambda_increase;
  v.require(l.runs > 0, "no flows");
  v.require(l.mass_violations == 0, "mass");
  v.require(l.lambda_violations == 0, "lambda");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria = {
      {"linear oracle equivalence", linear_oracle},
      {"implicit Euler vs heat flow", heat_flow},
      {"distance-function ground state", distance_ground_state},
      {"eigenfunction invariance and extinction", invariance_extinction},
      {"extinction-bound sandwich", extinction_sandwich},
      {"power-method invariants", power_invariants},
      {"prox oracle equivalence", prox_oracle},
      {"decomposition reconstruction", reconstruction},
      {"mass conservation and Lambda monotonicity", validation_ledger},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    v.detail.precision(3);
    const auto t0 = Clock::now();
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.passed = false;
      v.detail << " exception: " << e.what();
    }
    failures += !v.passed;
    std::printf("[%s] %zu %s (%.2fs):%s\n", v.passed ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                seconds_since(t0), v.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
