#include "nlspec/dense.hpp"

#include <algorithm>
#include <cmath>

#include "nlspec/error.hpp"

namespace nlspec {

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.front().size();
  DenseMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) throw DimensionMismatch("ragged matrix rows");
    for (std::size_t j = 0; j < c; ++j) {
      if (!std::isfinite(rows[i][j])) throw NonFiniteValue("matrix entry is not finite");
      m(i, j) = rows[i][j];
    }
  }
  return m;
}

Signal DenseMatrix::apply(const Signal& x) const {
  require_size(x, cols_, "DenseMatrix::apply");
  Signal y(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    const double* a = data_.data() + r * cols_;
    for (std::size_t c = 0; c < cols_; ++c) s += a[c] * x[c];
    y[r] = s;
  }
  return y;
}

double DenseMatrix::frobenius_norm() const noexcept {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double DenseMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool DenseMatrix::is_symmetric(double rel_tol) const noexcept {
  if (rows_ != cols_) return false;
  const double scale = std::max(max_abs(), 1e-300);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i + 1; j < cols_; ++j)
      if (std::abs((*this)(i, j) - (*this)(j, i)) > rel_tol * scale) return false;
  return true;
}

}  // namespace nlspec
