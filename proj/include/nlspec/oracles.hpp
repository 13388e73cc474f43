#pragma once

#include <span>
#include <vector>

#include "nlspec/dense.hpp"
#include "nlspec/graph.hpp"
#include "nlspec/signal.hpp"

/// Independent ground-truth generators. Nothing here calls into the prox,
/// flow or power code, so the tests can use these to check those paths.
namespace nlspec::oracles {

struct DenseSpectrum {
  std::vector<double> eigenvalues;   ///< non-decreasing
  std::vector<Signal> eigenvectors;  ///< orthonormal in the weighted inner product
  std::vector<double> measure;       ///< empty means unit weights
};

/// Full spectrum of A v = lambda M v by cyclic Jacobi rotations, M = diag(measure).
/// Throws NotSymmetric, DimensionTooLarge for n > 2000.
DenseSpectrum dense_symmetric_eigs(const DenseMatrix& A, std::span<const double> measure = {});

/// Exact solution of u' = -M^{-1} A u, u(0) = f, in the eigenbasis.
Signal linear_heat_solution(const DenseSpectrum& spectrum, const Signal& f, double t);

/// Shortest-path distance to the Dirichlet set with edge length 1/w.
Signal distance_transform(const WeightedGraph& graph);

/// max(a(t), 0) for a' = -lambda a^{p-1}, a(0) = 1.
double eigen_profile(double lambda, double p, double t);

}  // namespace nlspec::oracles
