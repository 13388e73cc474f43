#include <array>
#include <cmath>
#include <random>

#include "doctest.h"
#include "nlspec/diagnostics.hpp"
#include "nlspec/error.hpp"
#include "nlspec/functional.hpp"
#include "nlspec/grid.hpp"
#include "nlspec/oracles.hpp"
#include "support.hpp"

using namespace nlspec;

namespace {

DenseMatrix two_node_laplacian() { return DenseMatrix::from_rows({{1, -1}, {-1, 1}}); }

std::shared_ptr<const WeightedGraph> bounded_path(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, 1.0});
  return std::make_shared<const WeightedGraph>(n, e, std::vector<std::size_t>{0, n - 1});
}

}  // namespace

TEST_CASE("signal rejects non-finite values") {
  CHECK_THROWS_AS(Signal({1.0, NAN}), NonFiniteValue);
  CHECK_THROWS_AS(Signal(std::vector<double>{INFINITY}), NonFiniteValue);
  CHECK(Signal({1.0, 2.0}).all_finite());
}

TEST_CASE("graph construction validates its input") {
  CHECK_THROWS_AS(WeightedGraph(2, {{0, 0, 1.0}}), InvalidGraph);
  CHECK_THROWS_AS(WeightedGraph(2, {{0, 1, 1.0}, {1, 0, 2.0}}), InvalidGraph);
  CHECK_THROWS_AS(WeightedGraph(2, {{0, 1, 0.0}}), InvalidGraph);
  CHECK_THROWS_AS(WeightedGraph(3, {{0, 1, 1.0}}), InvalidGraph);
  CHECK_THROWS_AS(WeightedGraph(2, {{0, 1, 1.0}}, {}, {1.0, -1.0}), InvalidGraph);
  WeightedGraph g(3, {{1, 0, 2.0}, {1, 2, 1.0}});
  CHECK(g.edges()[0].i == 0);
  CHECK(g.edges()[0].j == 1);
  CHECK(g.neighbors(1).size() == 2);
}

TEST_CASE("evaluate examples") {
  auto path3 = path_graph(3);
  CHECK(make_graph_tv(path3).evaluate(Signal{0, 1, 1}) == doctest::Approx(1.0));
  CHECK(make_quadratic_form(two_node_laplacian()).evaluate(Signal{1, -1}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(make_graph_tv(path3).evaluate(Signal{1, 2}), DimensionMismatch);
  std::mt19937_64 rng(1);
  for (const auto& [name, F] : testing::catalog(4, rng)) {
    INFO(name);
    CHECK(F.evaluate(Signal(4)) == 0.0);
  }
}

TEST_CASE("project_nullspace examples") {
  auto tv = make_graph_tv(path_graph(3));
  const Signal p = project_nullspace(tv, Signal{0, 1, 2});
  for (double x : p) CHECK(x == doctest::Approx(1.0));
  const Signal z = project_nullspace(make_graph_tv(bounded_path(4)), Signal{3, 1, 2, 5});
  CHECK(max_abs(z) == 0.0);
  CHECK(max_abs(project_nullspace(make_l1(3), Signal{1, 2, 3})) == 0.0);
  std::mt19937_64 rng(2);
  for (const auto& [name, F] : testing::catalog(5, rng)) {
    INFO(name);
    const Signal u = testing::random_signal(5, rng);
    const Signal once = project_nullspace(F, u);
    const Signal twice = project_nullspace(F, once);
    CHECK(norm(once - twice) <= 1e-12 * (1.0 + norm(u)));
  }
}

TEST_CASE("rayleigh examples") {
  CHECK(rayleigh(make_quadratic_form(two_node_laplacian()), Signal{1, -1}) == doctest::Approx(2.0));
  CHECK(rayleigh(make_graph_tv(path_graph(2)), Signal{1, -1}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(rayleigh(make_graph_tv(path_graph(3)), Signal{2, 2, 2}), NullspaceElement);
  std::mt19937_64 rng(3);
  for (const auto& [name, F] : testing::catalog(4, rng)) {
    INFO(name);
    const Signal u = testing::random_signal(4, rng);
    CHECK(rayleigh(F, 3.0 * u) == doctest::Approx(rayleigh(F, u)).epsilon(1e-10));
    CHECK(rayleigh(F, -0.5 * u) == doctest::Approx(rayleigh(F, u)).epsilon(1e-10));
  }
}

TEST_CASE("euler_residual examples") {
  auto tv = make_graph_tv(path_graph(4));
  CHECK(euler_residual(tv, Signal(4), Signal(4)) == 0.0);
  const Signal u{0.3, -1.2, 0.7, 2.0};
  Signal bad(4);
  for (std::size_t i = 0; i < 4; ++i) bad[i] = 10.0 * (u[i] > 0 ? 1.0 : -1.0);
  CHECK(euler_residual(tv, u, bad) > 1.0);
  CHECK_FALSE(dual_ball_membership(tv, bad, 1e-9));
}

TEST_CASE("dual_ball_membership examples") {
  CHECK(dual_ball_membership(make_l1(2), Signal{0.5, -1.0}, 0.0));
  CHECK_FALSE(dual_ball_membership(make_l1(2), Signal{0.5, -1.1}, 0.0));
  CHECK_FALSE(dual_ball_membership(make_linf(2), Signal{0.7, 0.7}, 0.0));
  CHECK(dual_ball_membership(make_linf(2), Signal{0.5, -0.5}, 1e-12));
  auto tv2 = make_graph_tv(path_graph(2));
  CHECK(dual_ball_membership(tv2, Signal{1, -1}, 1e-12));
  CHECK_FALSE(dual_ball_membership(tv2, Signal{1.1, -1.1}, 1e-12));
  // mean-free requirement without boundary
  CHECK_FALSE(dual_ball_membership(tv2, Signal{0.5, 0.0}, 1e-12));
  CHECK_THROWS_AS(dual_ball_membership(make_dirichlet_p(path_graph(2), 2.0), Signal{0, 0}, 0.0),
                  UnsupportedFunctional);
}

TEST_CASE("dual_ball_membership agrees with the support function on tv and lipschitz") {
  // zeta in K iff <zeta, u> <= J(u) for all u; a violating u is easy to find by sampling
  std::mt19937_64 rng(4);
  int members = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto g = testing::random_graph(4, rng, trial % 2 == 0);
    auto F = trial % 4 < 2 ? make_graph_tv(g) : make_lipschitz_sup(g);
    Signal zeta = F.to_domain(testing::random_signal(4, rng, 0.6));
    if (!g->has_boundary()) zeta = zeta - project_nullspace(make_graph_tv(g), zeta);
    double worst = -INFINITY;
    for (int s = 0; s < 4000; ++s) {
      const Signal u = F.to_domain(testing::random_signal(4, rng));
      const double J = F.evaluate(u);
      if (J > 0) worst = std::max(worst, F.inner(zeta, u) / J);
    }
    const bool in = dual_ball_membership(F, zeta, 1e-9);
    members += in;
    if (worst > 1.0 + 1e-9) CHECK_FALSE(in);
    if (in) CHECK(worst <= 1.0 + 1e-9);
  }
  CHECK(members > 0);
}

TEST_CASE("min_norm_subgradient examples") {
  const Signal z1 = min_norm_subgradient(make_l1(3), Signal{2, 0, -3});
  CHECK(z1 == Signal{1, 0, -1});
  const Signal z2 = min_norm_subgradient(make_linf(3), Signal{3, 1, 3});
  CHECK(z2[0] == doctest::Approx(0.5));
  CHECK(z2[1] == 0.0);
  CHECK(z2[2] == doctest::Approx(0.5));
  CHECK(min_norm_subgradient(make_l1(1), Signal{-5}) == Signal{-1});
  CHECK_THROWS_AS(min_norm_subgradient(make_linf(2), Signal{0, 0}), ZeroSignal);
  CHECK_THROWS_AS(min_norm_subgradient(make_graph_tv(path_graph(2)), Signal{0, 1}), UnsupportedFunctional);
}

TEST_CASE("min_norm_subgradient is a certified subgradient of minimal norm") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> m(5);
    for (double& x : m) x = 0.5 + 0.5 * (unit(rng) + 1.0);
    Signal u = testing::random_signal(5, rng);
    u[1] = 0.0;
    u[3] = 0.0;
    const auto l1 = make_l1(5, m);
    const Signal z = min_norm_subgradient(l1, u);
    CHECK(dual_ball_membership(l1, z, 1e-12));
    CHECK(euler_residual(l1, u, z) <= 1e-12);
    for (int s = 0; s < 20; ++s) {
      Signal eta = z;
      eta[1] = unit(rng);
      eta[3] = unit(rng);
      CHECK(l1.norm(z) <= l1.norm(eta) + 1e-15);
    }

    Signal v = testing::random_signal(5, rng);
    v[2] = v[4] = max_abs(v) + 1.0;
    v[0] = -v[2];
    const auto linf = make_linf(5, m);
    const Signal y = min_norm_subgradient(linf, v);
    CHECK(dual_ball_membership(linf, y, 1e-12));
    CHECK(euler_residual(linf, v, y) <= 1e-12);
    // other subgradients redistribute mass sign(v_i) * a_i / m_i over the argmax set
    for (int s = 0; s < 20; ++s) {
      std::array<double, 3> a{};
      double total = 0.0;
      for (double& x : a) total += (x = 0.05 + (unit(rng) + 1.0));
      Signal eta(5);
      const std::array<std::size_t, 3> idx{0, 2, 4};
      for (std::size_t k = 0; k < 3; ++k) eta[idx[k]] = (v[idx[k]] > 0 ? 1.0 : -1.0) * a[k] / total / m[idx[k]];
      CHECK(euler_residual(linf, v, eta) <= 1e-12);
      CHECK(linf.norm(y) <= linf.norm(eta) + 1e-15);
    }
  }
}

TEST_CASE("eigen_certificate examples") {
  auto Q = make_quadratic_form(two_node_laplacian());
  const double r = 1.0 / std::sqrt(2.0);
  const auto good = eigen_certificate(Q, Signal{r, -r}, 2.0);
  CHECK(good.euler_residual <= 1e-12);
  CHECK(good.subgradient_gap <= 1e-12);
  CHECK(good.collinearity <= 1e-12);
  CHECK(eigen_certificate(Q, Signal{1, 0}, 1.0).subgradient_gap > 0.0);
  const auto zero = eigen_certificate(Q, Signal{r, -r}, 0.0);
  CHECK(zero.euler_residual == doctest::Approx(2.0 * Q.evaluate(Signal{r, -r})));
  CHECK_THROWS_AS(eigen_certificate(Q, Signal{0, 0}, 1.0), ZeroSignal);
}

TEST_CASE("homogeneity, nonnegativity and nullspace invariance") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    for (const auto& [name, F] : testing::catalog(5, rng)) {
      INFO(name);
      const Signal u = testing::random_signal(5, rng);
      const double J = F.evaluate(u);
      CHECK(J >= 0.0);
      for (double t : {-2.0, 0.5, 3.0})
        CHECK(std::abs(F.evaluate(t * u) - std::pow(std::abs(t), F.degree()) * J) <= 1e-10 * (1.0 + J));
      const auto& basis = F.nullspace_basis();
      if (!basis.empty()) {
        Signal shifted = u;
        axpy(2.5, basis.front(), shifted);
        CHECK(std::abs(F.evaluate(shifted) - J) <= 1e-10 * (1.0 + J));
      }
      const Signal r = u - project_nullspace(F, u);
      for (const Signal& b : basis) CHECK(std::abs(F.inner(r, b)) <= 1e-12 * (1.0 + norm(u)));
    }
  }
}

TEST_CASE("nullspace basis by kind") {
  std::mt19937_64 rng(7);
  for (const auto& [name, F] : testing::catalog(4, rng, true)) {
    INFO(name);
    if (F.kind() == FunctionalKind::l1 || F.kind() == FunctionalKind::linf) continue;
    CHECK(F.nullspace_basis().empty());
  }
  for (const auto& [name, F] : testing::catalog(4, rng, false)) {
    INFO(name);
    const bool graph_kind = F.kind() != FunctionalKind::l1 && F.kind() != FunctionalKind::linf;
    CHECK(F.nullspace_basis().size() == (graph_kind ? 1u : 0u));
  }
}
