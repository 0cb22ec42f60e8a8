#ifndef QCHOM_QUADEXT_HPP
#define QCHOM_QUADEXT_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace qchom {

/// Exact rational number with 64-bit numerator/denominator, always kept
/// normalized (gcd 1, positive denominator). Intermediate products are
/// computed in 128-bit and overflow raises instead of wrapping.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(std::int64_t n) : num_(n), den_(1) {}
  Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) {
    if (den_ == 0) throw std::invalid_argument("Rational: zero denominator");
    normalize();
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_zero() const { return num_ == 0; }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from_i128(i128(a.num_) * b.den_ + i128(b.num_) * a.den_,
                     i128(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return from_i128(i128(a.num_) * b.den_ - i128(b.num_) * a.den_,
                     i128(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_i128(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  Rational operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

 private:
  using i128 = __int128;

  static Rational from_i128(i128 n, i128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    i128 g = gcd128(n < 0 ? -n : n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
      throw std::overflow_error("Rational: 64-bit overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
  }

  static i128 gcd128(i128 a, i128 b) {
    while (b != 0) {
      i128 t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }

  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  std::int64_t num_;
  std::int64_t den_;
};

/// Element a + b*tau of the quadratic field Q(tau), tau = (1+sqrt 5)/2.
/// Addition, subtraction and multiplication are exact; products reduce
/// with tau^2 = tau + 1. The zero test is exact: a + b*tau = 0 iff both
/// rational parts vanish (tau is irrational).
class QuadExt {
 public:
  QuadExt() = default;
  QuadExt(Rational a) : a_(a) {}
  QuadExt(Rational a, Rational b) : a_(a), b_(b) {}
  QuadExt(std::int64_t a) : a_(a) {}

  static QuadExt golden() { return QuadExt(Rational(0), Rational(1)); }

  const Rational& rational_part() const { return a_; }
  const Rational& golden_part() const { return b_; }

  bool is_zero() const { return a_.is_zero() && b_.is_zero(); }

  friend QuadExt operator+(const QuadExt& x, const QuadExt& y) {
    return QuadExt(x.a_ + y.a_, x.b_ + y.b_);
  }
  friend QuadExt operator-(const QuadExt& x, const QuadExt& y) {
    return QuadExt(x.a_ - y.a_, x.b_ - y.b_);
  }
  friend QuadExt operator*(const QuadExt& x, const QuadExt& y) {
    // (a1 + b1 t)(a2 + b2 t) = a1 a2 + b1 b2 + (a1 b2 + a2 b1 + b1 b2) t
    Rational bb = x.b_ * y.b_;
    return QuadExt(x.a_ * y.a_ + bb, x.a_ * y.b_ + x.b_ * y.a_ + bb);
  }
  QuadExt operator-() const { return QuadExt(-a_, -b_); }
  friend bool operator==(const QuadExt& x, const QuadExt& y) {
    return x.a_ == y.a_ && x.b_ == y.b_;
  }

  double to_double() const {
    constexpr double tau = 1.6180339887498948482;
    return a_.to_double() + b_.to_double() * tau;
  }

 private:
  Rational a_;
  Rational b_;
};

inline std::ostream& operator<<(std::ostream& os, const Rational& r) {
  os << r.num();
  if (r.den() != 1) os << "/" << r.den();
  return os;
}

inline std::ostream& operator<<(std::ostream& os, const QuadExt& q) {
  return os << q.rational_part() << " + (" << q.golden_part() << ")t";
}

}  // namespace qchom

#endif
