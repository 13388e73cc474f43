#include <algorithm>
#include <cmath>

#include "internal.hpp"

namespace nlspec::cli::detail {

Signal ReducedSpectrum::embed(const Signal& reduced) const {
  Signal s(n);
  for (std::size_t a = 0; a < free.size(); ++a) s[free[a]] = reduced[a];
  return s;
}

Signal ReducedSpectrum::restrict(const Signal& full) const {
  Signal s(free.size());
  for (std::size_t a = 0; a < free.size(); ++a) s[a] = full[free[a]];
  return s;
}

std::size_t ReducedSpectrum::first_nonzero() const {
  const auto& ev = spectrum.eigenvalues;
  const double top = std::max(1.0, std::abs(ev.back()));
  std::size_t i = 0;
  while (i + 1 < ev.size() && ev[i] <= 1e-9 * top) ++i;
  return i;
}

ReducedSpectrum reduced_spectrum(const FunctionalHandle& F) {
  const WeightedGraph* g = F.graph();
  ReducedSpectrum r;
  r.n = F.dimension();
  for (std::size_t i = 0; i < r.n; ++i)
    if (!g || !g->is_boundary(i)) r.free.push_back(i);
  const DenseMatrix full = F.matrix() ? *F.matrix() : (g ? graph_laplacian(*g) : DenseMatrix::identity(r.n));
  DenseMatrix A(r.free.size(), r.free.size());
  std::vector<double> m;
  for (std::size_t a = 0; a < r.free.size(); ++a) {
    m.push_back(F.measure()[r.free[a]]);
    for (std::size_t b = 0; b < r.free.size(); ++b) A(a, b) = full(r.free[a], r.free[b]);
  }
  r.spectrum = oracles::dense_symmetric_eigs(A, m);
  return r;
}

}  // namespace nlspec::cli::detail
