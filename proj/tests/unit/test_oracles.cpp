#include <cmath>
#include <queue>
#include <random>

#include "doctest.h"
#include "nlspec/error.hpp"
#include "nlspec/functional.hpp"
#include "nlspec/grid.hpp"
#include "nlspec/oracles.hpp"
#include "support.hpp"

using namespace nlspec;
using namespace nlspec::oracles;

namespace {

double reconstruction_error(const DenseMatrix& A, const DenseSpectrum& s) {
  const std::size_t n = A.rows();
  double err = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      double v = 0.0;
      for (std::size_t k = 0; k < n; ++k) v += s.eigenvalues[k] * s.eigenvectors[k][r] * s.eigenvectors[k][c];
      err += (A(r, c) - v) * (A(r, c) - v);
    }
  return std::sqrt(err);
}

DenseMatrix random_symmetric(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  DenseMatrix A(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r; c < n; ++c) A(r, c) = A(c, r) = g(rng);
  return A;
}

}  // namespace

TEST_CASE("dense eigensolver examples") {
  const auto s = dense_symmetric_eigs(graph_laplacian(*path_graph(2)));
  CHECK(s.eigenvalues[0] == doctest::Approx(0.0));
  CHECK(s.eigenvalues[1] == doctest::Approx(2.0));
  CHECK(std::abs(s.eigenvectors[0][0]) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(s.eigenvectors[1][0] * s.eigenvectors[1][1] == doctest::Approx(-0.5));

  const auto id = dense_symmetric_eigs(DenseMatrix::identity(5));
  for (double l : id.eigenvalues) CHECK(l == doctest::Approx(1.0));

  const auto p4 = dense_symmetric_eigs(graph_laplacian(*path_graph(4)));
  for (int k = 0; k < 4; ++k) CHECK(std::abs(p4.eigenvalues[k] - (2.0 - 2.0 * std::cos(k * M_PI / 4.0))) <= 1e-10);

  CHECK_THROWS_AS(dense_symmetric_eigs(DenseMatrix::from_rows({{1, 2}, {0, 1}})), NotSymmetric);
  CHECK_THROWS_AS(dense_symmetric_eigs(DenseMatrix(2001, 2001)), DimensionTooLarge);
}

TEST_CASE("dense eigensolver accuracy on random matrices") {
  std::mt19937_64 rng(21);
  for (std::size_t n : {3u, 8u, 25u}) {
    const DenseMatrix A = random_symmetric(n, rng);
    const auto s = dense_symmetric_eigs(A);
    CHECK(reconstruction_error(A, s) <= 1e-9 * A.frobenius_norm());
    for (std::size_t i = 0; i < n; ++i) {
      if (i) CHECK(s.eigenvalues[i] >= s.eigenvalues[i - 1]);
      const Signal Av = A.apply(s.eigenvectors[i]);
      CHECK(norm(Av - s.eigenvalues[i] * s.eigenvectors[i]) <= 1e-10 * A.frobenius_norm());
      for (std::size_t j = 0; j < n; ++j)
        CHECK(std::abs(dot(s.eigenvectors[i], s.eigenvectors[j]) - (i == j ? 1.0 : 0.0)) <= 1e-10);
    }
  }
}

TEST_CASE("weighted eigenproblem") {
  std::mt19937_64 rng(22);
  const DenseMatrix A = graph_laplacian(*path_graph(5));
  const std::vector<double> m{0.5, 1.0, 2.0, 1.5, 0.7};
  const auto s = dense_symmetric_eigs(A, m);
  for (std::size_t i = 0; i < 5; ++i) {
    Signal r = A.apply(s.eigenvectors[i]);
    for (std::size_t k = 0; k < 5; ++k) r[k] -= s.eigenvalues[i] * m[k] * s.eigenvectors[i][k];
    CHECK(norm(r) <= 1e-10 * A.frobenius_norm());
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(std::abs(dot(s.eigenvectors[i], s.eigenvectors[j], m) - (i == j ? 1.0 : 0.0)) <= 1e-10);
  }
}

TEST_CASE("linear heat solution") {
  std::mt19937_64 rng(23);
  const DenseMatrix A = graph_laplacian(*path_graph(8));
  const auto s = dense_symmetric_eigs(A);
  const Signal f = testing::random_signal(8, rng);
  CHECK(norm(linear_heat_solution(s, f, 0.0) - f) <= 1e-12);
  const Signal v = s.eigenvectors[3];
  CHECK(norm(linear_heat_solution(s, v, 0.7) - std::exp(-s.eigenvalues[3] * 0.7) * v) <= 1e-12);
  const Signal a = linear_heat_solution(s, linear_heat_solution(s, f, 0.3), 0.4);
  CHECK(norm(a - linear_heat_solution(s, f, 0.7)) <= 1e-10);

  // the mean-free part aligns with the first nontrivial eigenvector at the predicted rate
  const Signal g = f - dot(f, s.eigenvectors[0]) * s.eigenvectors[0];
  const double c1 = dot(g, s.eigenvectors[1]);
  REQUIRE(std::abs(c1) > 1e-3);
  const double gap = s.eigenvalues[2] - s.eigenvalues[1];
  const double t = std::log(norm(g) / std::abs(c1) / 1e-6) / gap;
  const Signal u = linear_heat_solution(s, g, t);
  Signal w = (1.0 / norm(u)) * u;
  if (dot(w, s.eigenvectors[1]) < 0) w *= -1.0;
  CHECK(norm(w - s.eigenvectors[1]) <= 2e-6);
}

TEST_CASE("distance transform examples") {
  const Signal d = distance_transform(*build_grid_graph({3, 1, 1.0, BoundaryMode::dirichlet}));
  CHECK(d == Signal{0, 1, 2, 1, 0});
  const WeightedGraph all(3, {{0, 1, 1.0}, {1, 2, 1.0}}, {0, 1, 2});
  CHECK(max_abs(distance_transform(all)) == 0.0);
  CHECK_THROWS_AS(distance_transform(*path_graph(3)), EmptyBoundary);

  // breadth-first search on the unit lattice
  auto g = build_grid_graph({3, 3, 1.0, BoundaryMode::dirichlet});
  std::vector<int> hops(g->node_count(), -1);
  std::queue<std::size_t> q;
  for (std::size_t b : g->boundary()) hops[b] = 0, q.push(b);
  while (!q.empty()) {
    const std::size_t x = q.front();
    q.pop();
    for (const auto& nb : g->neighbors(x))
      if (hops[nb.node] < 0) hops[nb.node] = hops[x] + 1, q.push(nb.node);
  }
  const Signal dt = distance_transform(*g);
  for (std::size_t i = 0; i < hops.size(); ++i) CHECK(dt[i] == doctest::Approx(hops[i] < 0 ? 0 : hops[i]));
  CHECK(dt[12] == 2.0);
  CHECK(dt[7] == 1.0);
}

TEST_CASE("distance transform satisfies the discrete eikonal property") {
  for (auto spec : {GridSpec{6, 5, 0.5, BoundaryMode::dirichlet}, GridSpec{11, 1, 0.25, BoundaryMode::dirichlet}}) {
    auto g = build_grid_graph(spec);
    const Signal d = distance_transform(*g);
    for (std::size_t x = 0; x < g->node_count(); ++x) {
      if (g->is_boundary(x)) continue;
      double best = INFINITY;
      for (const auto& nb : g->neighbors(x)) best = std::min(best, d[nb.node] + 1.0 / g->edges()[nb.edge].w);
      CHECK(best == doctest::Approx(d[x]).epsilon(1e-14));
    }
  }
}

TEST_CASE("eigen profile examples") {
  CHECK(eigen_profile(1.0, 2.0, 0.0) == 1.0);
  CHECK(eigen_profile(2.0, 1.0, 0.5) == 0.0);
  CHECK(eigen_profile(1.0, 3.0, 1.0) == doctest::Approx(0.5));
  CHECK(eigen_profile(1.0, 2.0, 1.0) == doctest::Approx(std::exp(-1.0)));
  for (double p : {1.0, 1.5, 2.0, 3.0})
    for (double t : {0.1, 0.3, 0.45}) {
      const double lam = 2.0, h = 1e-6;
      const double a = eigen_profile(lam, p, t);
      if (a <= 0) continue;
      const double deriv = (eigen_profile(lam, p, t + h) - eigen_profile(lam, p, t - h)) / (2 * h);
      CHECK(std::abs(deriv + lam * std::pow(a, p - 1.0)) <= 1e-4);
    }
}
