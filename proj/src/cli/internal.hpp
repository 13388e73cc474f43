#pragma once

#include <vector>

#include "nlspec/functional.hpp"
#include "nlspec/oracles.hpp"

namespace nlspec::cli::detail {

/// Dense spectrum of the quadratic operator (the matrix, else the graph
/// Laplacian) restricted to the non-Dirichlet nodes, in the node measure.
struct ReducedSpectrum {
  oracles::DenseSpectrum spectrum;
  std::vector<std::size_t> free;
  std::size_t n = 0;

  Signal embed(const Signal& reduced) const;
  Signal restrict(const Signal& full) const;
  std::size_t first_nonzero() const;
};

ReducedSpectrum reduced_spectrum(const FunctionalHandle& F);

}  // namespace nlspec::cli::detail
