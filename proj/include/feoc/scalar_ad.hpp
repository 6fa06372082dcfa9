#pragma once

// Scalar reverse-mode automatic differentiation.
//
// Real records every arithmetic operation onto a ScalarTape as an entry with
// up to two parents and their local partial derivatives. It is used where the
// computation is a long chain of small scalar operations (rolling out
// dynamics for trajectory optimization), which the matrix Tape handles
// poorly. Templated model code instantiated with Real gets exact gradients.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Core>

namespace feoc::ad {

class ScalarTape;

class Real {
 public:
  static constexpr std::uint32_t kConstant = std::numeric_limits<std::uint32_t>::max();

  Real() = default;
  Real(double value) : value_(value) {}  // NOLINT: implicit constants are intended
  Real(double value, ScalarTape* tape, std::uint32_t index)
      : value_(value), tape_(tape), index_(index) {}

  double value() const noexcept { return value_; }
  ScalarTape* tape() const noexcept { return tape_; }
  std::uint32_t index() const noexcept { return index_; }
  bool is_constant() const noexcept { return index_ == kConstant; }

  Real& operator+=(const Real& o);
  Real& operator-=(const Real& o);
  Real& operator*=(const Real& o);
  Real& operator/=(const Real& o);

 private:
  double value_ = 0.0;
  ScalarTape* tape_ = nullptr;
  std::uint32_t index_ = kConstant;
};

class ScalarTape {
 public:
  struct Entry {
    std::uint32_t lhs;
    std::uint32_t rhs;
    double dlhs;
    double drhs;
  };

  void reserve(std::size_t n) { entries_.reserve(n); }
  void clear() { entries_.clear(); }
  std::size_t size() const noexcept { return entries_.size(); }

  Real variable(double value) {
    entries_.push_back({Real::kConstant, Real::kConstant, 0.0, 0.0});
    return {value, this, static_cast<std::uint32_t>(entries_.size() - 1)};
  }

  /// Records a node with parents a, b (either may be constant).
  Real push(double value, const Real& a, double da, const Real& b, double db) {
    entries_.push_back({a.index(), b.index(), da, db});
    return {value, this, static_cast<std::uint32_t>(entries_.size() - 1)};
  }

  /// Adjoint of every node with respect to `output`.
  std::vector<double> gradient(const Real& output) const {
    std::vector<double> adj(entries_.size(), 0.0);
    if (output.is_constant()) return adj;
    adj[output.index()] = 1.0;
    for (std::size_t i = output.index() + 1; i-- > 0;) {
      const double a = adj[i];
      if (a == 0.0) continue;
      const Entry& e = entries_[i];
      if (e.lhs != Real::kConstant) adj[e.lhs] += a * e.dlhs;
      if (e.rhs != Real::kConstant) adj[e.rhs] += a * e.drhs;
    }
    return adj;
  }

 private:
  std::vector<Entry> entries_;
};

namespace detail {

inline ScalarTape* tape_of(const Real& a, const Real& b) {
  return a.tape() != nullptr ? a.tape() : b.tape();
}

inline Real unary(const Real& a, double value, double da) {
  if (a.is_constant()) return Real(value);
  return a.tape()->push(value, a, da, Real(), 0.0);
}

inline Real binary(const Real& a, const Real& b, double value, double da, double db) {
  if (a.is_constant() && b.is_constant()) return Real(value);
  return tape_of(a, b)->push(value, a, da, b, db);
}

}  // namespace detail

inline Real operator+(const Real& a, const Real& b) {
  return detail::binary(a, b, a.value() + b.value(), 1.0, 1.0);
}
inline Real operator-(const Real& a, const Real& b) {
  return detail::binary(a, b, a.value() - b.value(), 1.0, -1.0);
}
inline Real operator*(const Real& a, const Real& b) {
  return detail::binary(a, b, a.value() * b.value(), b.value(), a.value());
}
inline Real operator/(const Real& a, const Real& b) {
  const double inv = 1.0 / b.value();
  const double q = a.value() * inv;
  return detail::binary(a, b, q, inv, -q * inv);
}
inline Real operator-(const Real& a) { return detail::unary(a, -a.value(), -1.0); }
inline Real operator+(const Real& a) { return a; }

inline Real& Real::operator+=(const Real& o) { return *this = *this + o; }
inline Real& Real::operator-=(const Real& o) { return *this = *this - o; }
inline Real& Real::operator*=(const Real& o) { return *this = *this * o; }
inline Real& Real::operator/=(const Real& o) { return *this = *this / o; }

inline bool operator<(const Real& a, const Real& b) { return a.value() < b.value(); }
inline bool operator>(const Real& a, const Real& b) { return a.value() > b.value(); }
inline bool operator<=(const Real& a, const Real& b) { return a.value() <= b.value(); }
inline bool operator>=(const Real& a, const Real& b) { return a.value() >= b.value(); }
inline bool operator==(const Real& a, const Real& b) { return a.value() == b.value(); }
inline bool operator!=(const Real& a, const Real& b) { return a.value() != b.value(); }

inline Real sin(const Real& a) { return detail::unary(a, std::sin(a.value()), std::cos(a.value())); }
inline Real cos(const Real& a) { return detail::unary(a, std::cos(a.value()), -std::sin(a.value())); }
inline Real tan(const Real& a) {
  const double t = std::tan(a.value());
  return detail::unary(a, t, 1.0 + t * t);
}
inline Real exp(const Real& a) {
  const double e = std::exp(a.value());
  return detail::unary(a, e, e);
}
inline Real log(const Real& a) { return detail::unary(a, std::log(a.value()), 1.0 / a.value()); }
inline Real sqrt(const Real& a) {
  const double s = std::sqrt(a.value());
  return detail::unary(a, s, 0.5 / s);
}
inline Real tanh(const Real& a) {
  const double t = std::tanh(a.value());
  return detail::unary(a, t, 1.0 - t * t);
}
inline Real abs(const Real& a) {
  return detail::unary(a, std::abs(a.value()), a.value() < 0.0 ? -1.0 : 1.0);
}
inline bool isfinite(const Real& a) { return std::isfinite(a.value()); }

/// Underlying double of either a Real or a plain arithmetic value.
inline double value_of(const Real& a) { return a.value(); }
inline double value_of(double a) { return a; }

}  // namespace feoc::ad

namespace Eigen {

template <>
struct NumTraits<feoc::ad::Real> : NumTraits<double> {
  using Real = feoc::ad::Real;
  using NonInteger = feoc::ad::Real;
  using Nested = feoc::ad::Real;
  using Literal = feoc::ad::Real;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 2,
    MulCost = 3,
  };
};

}  // namespace Eigen
