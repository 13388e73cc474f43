#include <cmath>
#include <random>

#include "doctest.h"
#include "nlspec/error.hpp"
#include "nlspec/functional.hpp"
#include "nlspec/grid.hpp"
#include "nlspec/oracles.hpp"
#include "nlspec/power.hpp"
#include "nlspec/prox.hpp"
#include "support.hpp"

using namespace nlspec;

namespace {

double smallest_nonzero(const oracles::DenseSpectrum& s, std::size_t* index = nullptr) {
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i)
    if (s.eigenvalues[i] > 1e-9) {
      if (index) *index = i;
      return s.eigenvalues[i];
    }
  return 0.0;
}

}  // namespace

TEST_CASE("power method on the path Laplacian matches the dense spectrum") {
  for (std::size_t n : {2u, 6u, 20u}) {
    CAPTURE(n);
    auto g = path_graph(n);
    const auto Q = make_quadratic_form(graph_laplacian(*g));
    const auto spec = oracles::dense_symmetric_eigs(graph_laplacian(*g));
    std::size_t i1 = 0;
    const double l1 = smallest_nonzero(spec, &i1);
    Signal start(n);
    for (std::size_t i = 0; i < n; ++i) start[i] = std::cos(0.3 * i) + (i == 0 ? 1.0 : 0.0);
    PowerOptions o;
    o.tol = 1e-14;
    o.max_iter = 200000;
    const EigenPair e = power_method(Q, start, o);
    CHECK(e.converged);
    CHECK(std::abs(e.lambda - l1) <= 1e-8 * l1);
    CHECK(std::abs(testing::cosine(e.w, spec.eigenvectors[i1])) >= 1 - 1e-10);
    CHECK(e.rayleigh == doctest::Approx(l1).epsilon(1e-8));
    CHECK(e.certificate.worst() <= 1e-6);
  }
}

TEST_CASE("eigenvalue from the prox multiplier") {
  // a 2-node quadratic with A = diag(0, 2): w = e_2 has J = 1, prox_{sigma}(w) = w / (1 + 2 sigma)
  const auto Q = make_quadratic_form(DenseMatrix::from_rows({{2, 0}, {0, 2}}));
  PowerOptions o;
  o.c = 0.5;
  o.rule = StepRule::constant;
  o.max_iter = 1;
  const EigenPair e = power_method(Q, Signal{0, 1}, o);
  CHECK(e.sigma == doctest::Approx(0.5));
  CHECK(e.mu == doctest::Approx(0.5));
  CHECK(e.lambda == doctest::Approx(2.0));

  // mu = 0.5, sigma = 1 forces lambda = 1
  o.c = 1.0 / 2.0;
  const auto Q1 = make_quadratic_form(DenseMatrix::from_rows({{1, 0}, {0, 1}}));
  const EigenPair e1 = power_method(Q1, Signal{1, 0}, o);
  CHECK(e1.sigma == doctest::Approx(1.0));
  CHECK(e1.mu == doctest::Approx(0.5));
  CHECK(e1.lambda == doctest::Approx(1.0));
}

TEST_CASE("an eigenvector is a fixed point") {
  const std::size_t n = 8;
  const auto F = make_graph_tv(path_graph(n));
  Signal w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = i < n / 2 ? 1.0 : -1.0;
  w *= 1.0 / F.norm(w);
  PowerOptions o;
  o.tol = 1e-10;
  const EigenPair e = power_method(F, w, o);
  CHECK(e.iterations == 1);
  CHECK(e.converged);
  CHECK(e.history.front().residual <= o.tol);
  CHECK(max_abs(e.w - w) <= 1e-12);
  CHECK(e.lambda == doctest::Approx(2.0 / std::sqrt(double(n))).epsilon(1e-9));
  CHECK(e.residual <= 1e-9);
}

TEST_CASE("start errors") {
  const auto F = make_graph_tv(path_graph(4));
  CHECK_THROWS_AS(power_method(F, Signal{3, 3, 3, 3}), NullspaceStart);
  CHECK_THROWS_AS(power_method(F, Signal{1, 2}), DimensionMismatch);
  PowerOptions o;
  o.c = 1.0;
  CHECK_THROWS_AS(power_method(F, Signal{1, 2, 3, 4}, o), BadParams);
  CHECK_THROWS_AS(ground_state_search(F, 0, 1), BadParams);
  CHECK_THROWS_AS(parse_step_rule("fast"), BadParams);
  CHECK(parse_step_rule(to_string(StepRule::constant)) == StepRule::constant);
}

TEST_CASE("lipschitz ground state is the distance function") {
  for (std::size_t width : {9u, 33u}) {
    CAPTURE(width);
    auto g = build_grid_graph({width, 1, 1.0, BoundaryMode::dirichlet});
    const auto F = make_lipschitz_sup(g);
    const Signal d = oracles::distance_transform(*g);
    const auto res = ground_state_search(F, 4, 7, {}, 4);
    CHECK(res.failures.empty());
    CHECK(std::abs(testing::cosine(res.best.w, d, F.measure())) >= 0.99);
    const double expected = F.evaluate(d) / F.norm(d);
    CHECK(std::abs(res.best.rayleigh - expected) <= 0.02 * expected);
    CHECK(res.lambda_min <= res.lambda_max);
  }
}

TEST_CASE("two-node tv ground state against a search over the circle") {
  const auto F = make_graph_tv(path_graph(2));
  double best = INFINITY;
  const int N = 2000000;
  for (int i = 0; i < N; ++i) {
    const double th = 2 * M_PI * i / N;
    Signal u{std::cos(th), std::sin(th)};
    Signal r = u - project_nullspace(F, u);
    const double nr = F.norm(r);
    if (nr < 1e-9) continue;
    best = std::min(best, F.evaluate(u) / nr);
  }
  const auto res = ground_state_search(F, 5, 3);
  CHECK(res.best.rayleigh == doctest::Approx(best).epsilon(1e-6));
}

TEST_CASE("quadratic ground state over restarts") {
  std::mt19937_64 rng(11);
  auto g = testing::random_graph(7, rng);
  FunctionalParams params;
  const auto Q = make_functional(FunctionalKind::quadratic_form, g, params);
  std::vector<double> m(g->node_measure().begin(), g->node_measure().end());
  const auto spec = oracles::dense_symmetric_eigs(graph_laplacian(*g), m);
  PowerOptions o;
  o.tol = 1e-14;
  o.max_iter = 200000;
  const auto res = ground_state_search(Q, 5, 2, o, 3);
  const double l1 = smallest_nonzero(spec);
  CHECK(std::abs(res.best.lambda - l1) <= 1e-8 * l1);
}

TEST_CASE("ground state search is independent of thread count") {
  const auto F = make_dirichlet_p(path_graph(6), 3.0);
  const auto a = ground_state_search(F, 6, 42, {}, 1);
  const auto b = ground_state_search(F, 6, 42, {}, 4);
  REQUIRE(a.all.size() == b.all.size());
  for (std::size_t i = 0; i < a.all.size(); ++i) {
    CHECK(a.all[i].start_index == b.all[i].start_index);
    CHECK(a.all[i].w == b.all[i].w);
    CHECK(a.all[i].lambda == b.all[i].lambda);
  }
}

TEST_CASE("power method invariants across the catalog") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    std::mt19937_64 rng(seed);
    for (bool boundary : {false, true}) {
      for (const auto& nf : testing::catalog(6, rng, boundary)) {
        for (StepRule rule : {StepRule::constant, StepRule::adaptive}) {
          for (double c : {0.5, 0.9}) {
            CAPTURE(nf.name);
            CAPTURE(seed);
            CAPTURE(boundary);
            CAPTURE(c);
            PowerOptions o;
            o.c = c;
            o.rule = rule;
            o.max_iter = 300;
            const Signal start = nf.F.to_domain(testing::random_signal(6, rng));
            const EigenPair e = power_method(nf.F, start, o);
            const PowerAudit a = audit_power(e, nf.F, o);
            CHECK(a.energy_violations == 0);
            CHECK(a.sphere_violations == 0);
            CHECK(a.orthogonality_violations == 0);
            CHECK(a.sigma_decreases == 0);
            CHECK(a.zero_prox == 0);
            CHECK(a.summable);
            CHECK(e.lambda >= 0.0);
            CHECK(e.residual >= 0.0);
            if (e.converged) CHECK(a.fixed_point_residual <= 10 * o.tol + 1e-9);
          }
        }
      }
    }
  }
}

TEST_CASE("adaptive step respects a supplied Poincare constant") {
  // path Laplacian on 6 nodes: ||u - Pu||^2 <= (2 / lambda_1) J(u)
  auto g = path_graph(6);
  const auto Q = make_quadratic_form(graph_laplacian(*g));
  const double l1 = smallest_nonzero(oracles::dense_symmetric_eigs(graph_laplacian(*g)));
  PowerOptions o;
  o.poincare_constant = 2.0 / l1;
  const EigenPair e = power_method(Q, Signal{1, 0, 0, 0, 0, 2}, o);
  CHECK(audit_power(e, Q, o).poincare_violations == 0);
  o.poincare_constant = 0.5 / l1;
  CHECK(audit_power(e, Q, o).poincare_violations > 0);
}
