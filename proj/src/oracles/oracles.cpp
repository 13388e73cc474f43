#include "nlspec/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <utility>

#include "nlspec/error.hpp"

namespace nlspec::oracles {

namespace {

double off_diagonal_norm(const DenseMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

// Classical cyclic Jacobi; accumulates rotations in v (columns are eigenvectors).
void jacobi_sweeps(DenseMatrix& a, DenseMatrix& v) {
  const std::size_t n = a.rows();
  const double target = 1e-12 * std::max(a.frobenius_norm(), std::numeric_limits<double>::min());
  for (int sweep = 0; sweep < 100; ++sweep) {
    if (off_diagonal_norm(a) <= target) return;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
}

}  // namespace

DenseSpectrum dense_symmetric_eigs(const DenseMatrix& A, std::span<const double> measure) {
  const std::size_t n = A.rows();
  if (A.cols() != n) throw NotSymmetric("matrix is not square");
  if (n > 2000) throw DimensionTooLarge("dense eigensolver limited to n <= 2000");
  if (!A.is_symmetric()) throw NotSymmetric("matrix is not symmetric");
  if (!measure.empty() && measure.size() != n) throw DimensionMismatch("measure length differs from matrix size");

  std::vector<double> inv_sqrt_m(n, 1.0);
  if (!measure.empty())
    for (std::size_t i = 0; i < n; ++i) {
      if (!(measure[i] > 0.0)) throw BadParams("measure entries must be positive");
      inv_sqrt_m[i] = 1.0 / std::sqrt(measure[i]);
    }

  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a(i, j) = 0.5 * (A(i, j) + A(j, i)) * inv_sqrt_m[i] * inv_sqrt_m[j];
  DenseMatrix v = DenseMatrix::identity(n);
  jacobi_sweeps(a, v);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

  DenseSpectrum out;
  out.measure.assign(measure.begin(), measure.end());
  out.eigenvalues.reserve(n);
  out.eigenvectors.reserve(n);
  for (std::size_t k : order) {
    out.eigenvalues.push_back(a(k, k));
    Signal vec(n);
    for (std::size_t i = 0; i < n; ++i) vec[i] = v(i, k) * inv_sqrt_m[i];
    // Deterministic sign: first entry of largest magnitude is positive.
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(vec[i]) > std::abs(vec[arg]) * (1.0 + 1e-9)) arg = i;
    if (vec[arg] < 0.0) vec *= -1.0;
    out.eigenvectors.push_back(std::move(vec));
  }
  return out;
}

Signal linear_heat_solution(const DenseSpectrum& spectrum, const Signal& f, double t) {
  if (!(t >= 0.0)) throw BadParams("time must be >= 0");
  const std::size_t n = spectrum.eigenvalues.size();
  require_size(f, n, "linear_heat_solution");
  Signal u(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double c = dot(f, spectrum.eigenvectors[k], spectrum.measure);
    axpy(c * std::exp(-spectrum.eigenvalues[k] * t), spectrum.eigenvectors[k], u);
  }
  return u;
}

Signal distance_transform(const WeightedGraph& graph) {
  if (!graph.has_boundary()) throw EmptyBoundary("distance transform needs a Dirichlet set");
  const std::size_t n = graph.node_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (std::size_t b : graph.boundary()) {
    dist[b] = 0.0;
    queue.emplace(0.0, b);
  }
  while (!queue.empty()) {
    const auto [d, node] = queue.top();
    queue.pop();
    if (d > dist[node]) continue;
    for (const auto& nb : graph.neighbors(node)) {
      const double cand = d + 1.0 / graph.edges()[nb.edge].w;
      if (cand < dist[nb.node]) {
        dist[nb.node] = cand;
        queue.emplace(cand, nb.node);
      }
    }
  }
  // Contracted-boundary connectivity guarantees every node is reached.
  return Signal(std::move(dist));
}

double eigen_profile(double lambda, double p, double t) {
  if (!(lambda >= 0.0) || !(p >= 1.0) || !(t >= 0.0)) throw BadParams("eigen_profile needs lambda >= 0, p >= 1, t >= 0");
  if (p == 2.0) return std::exp(-lambda * t);
  const double base = 1.0 - (2.0 - p) * lambda * t;
  if (base <= 0.0) return 0.0;
  return std::pow(base, 1.0 / (2.0 - p));
}

}  // namespace nlspec::oracles
