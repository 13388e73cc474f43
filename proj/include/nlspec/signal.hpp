#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace nlspec {

/// Real-valued function on the nodes of a graph.
///
/// Values are finite; the constructors taking external data verify this and
/// throw NonFiniteValue otherwise. Arithmetic helpers do not re-check.
class Signal {
public:
  Signal() = default;
  explicit Signal(std::size_t n, double value = 0.0);
  explicit Signal(std::vector<double> values);
  Signal(std::initializer_list<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vector() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  Signal& operator+=(const Signal& other);
  Signal& operator-=(const Signal& other);
  Signal& operator*=(double s) noexcept;

  bool all_finite() const noexcept;

  friend bool operator==(const Signal&, const Signal&) = default;

private:
  std::vector<double> values_;
};

Signal operator+(Signal a, const Signal& b);
Signal operator-(Signal a, const Signal& b);
Signal operator*(double s, Signal a);
Signal operator*(Signal a, double s);

/// a += s * b
void axpy(double s, const Signal& b, Signal& a);

/// Weighted inner product sum_i m_i a_i b_i. An empty measure means unit weights.
double dot(const Signal& a, const Signal& b, std::span<const double> measure = {});
double norm(const Signal& a, std::span<const double> measure = {});
double max_abs(const Signal& a) noexcept;

void require_same_size(const Signal& a, const Signal& b, const char* what);
void require_size(const Signal& a, std::size_t n, const char* what);

}  // namespace nlspec
