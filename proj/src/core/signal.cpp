#include "nlspec/signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nlspec/error.hpp"

namespace nlspec {

Signal::Signal(std::size_t n, double value) : values_(n, value) {
  if (!std::isfinite(value)) throw NonFiniteValue("fill value is not finite");
}

Signal::Signal(std::vector<double> values) : values_(std::move(values)) {
  if (!all_finite()) throw NonFiniteValue("signal contains NaN or infinity");
}

Signal::Signal(std::initializer_list<double> values) : values_(values) {
  if (!all_finite()) throw NonFiniteValue("signal contains NaN or infinity");
}

Signal& Signal::operator+=(const Signal& other) {
  require_same_size(*this, other, "operator+=");
  for (std::size_t i = 0; i < size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Signal& Signal::operator-=(const Signal& other) {
  require_same_size(*this, other, "operator-=");
  for (std::size_t i = 0; i < size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Signal& Signal::operator*=(double s) noexcept {
  for (double& v : values_) v *= s;
  return *this;
}

bool Signal::all_finite() const noexcept {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

Signal operator+(Signal a, const Signal& b) { return a += b; }
Signal operator-(Signal a, const Signal& b) { return a -= b; }
Signal operator*(double s, Signal a) { return a *= s; }
Signal operator*(Signal a, double s) { return a *= s; }

void axpy(double s, const Signal& b, Signal& a) {
  require_same_size(a, b, "axpy");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
}

double dot(const Signal& a, const Signal& b, std::span<const double> measure) {
  require_same_size(a, b, "dot");
  double s = 0.0;
  if (measure.empty()) {
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  } else {
    if (measure.size() != a.size()) throw DimensionMismatch("measure length differs from signal length");
    for (std::size_t i = 0; i < a.size(); ++i) s += measure[i] * a[i] * b[i];
  }
  return s;
}

double norm(const Signal& a, std::span<const double> measure) {
  return std::sqrt(std::max(0.0, dot(a, a, measure)));
}

double max_abs(const Signal& a) noexcept {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void require_same_size(const Signal& a, const Signal& b, const char* what) {
  if (a.size() != b.size())
    throw DimensionMismatch(std::string(what) + ": sizes " + std::to_string(a.size()) + " and " +
                            std::to_string(b.size()));
}

void require_size(const Signal& a, std::size_t n, const char* what) {
  if (a.size() != n)
    throw DimensionMismatch(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                            std::to_string(a.size()));
}

}  // namespace nlspec
