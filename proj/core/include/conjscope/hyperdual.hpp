#pragma once

#include <cmath>
#include <ostream>

namespace conjscope {

/// Hyper-dual number re + e1*ε1 + e2*ε2 + e12*ε1ε2 with ε1² = ε2² = 0.
///
/// Seeding e1 and e2 along two directions a, b and evaluating f gives
/// e1 = Df·a, e2 = Df·b and e12 = D²f[a, b] with no truncation error.
struct HyperDual {
  double re = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;
  double e12 = 0.0;

  constexpr HyperDual() = default;
  constexpr HyperDual(double value) : re(value) {}  // NOLINT: implicit promotion is intended
  constexpr HyperDual(double value, double d1, double d2, double d12)
      : re(value), e1(d1), e2(d2), e12(d12) {}

  constexpr HyperDual& operator+=(const HyperDual& o) {
    re += o.re;
    e1 += o.e1;
    e2 += o.e2;
    e12 += o.e12;
    return *this;
  }
  constexpr HyperDual& operator-=(const HyperDual& o) {
    re -= o.re;
    e1 -= o.e1;
    e2 -= o.e2;
    e12 -= o.e12;
    return *this;
  }
  constexpr HyperDual& operator*=(const HyperDual& o) {
    *this = HyperDual(re * o.re, re * o.e1 + e1 * o.re, re * o.e2 + e2 * o.re,
                      re * o.e12 + e1 * o.e2 + e2 * o.e1 + e12 * o.re);
    return *this;
  }
  HyperDual& operator/=(const HyperDual& o);

  friend constexpr bool operator==(const HyperDual&, const HyperDual&) = default;
};

// Lifts a scalar function with value f, first derivative fp and second
// derivative fpp (all at x.re) to the hyper-dual algebra.
constexpr HyperDual chain(const HyperDual& x, double f, double fp, double fpp) {
  return {f, fp * x.e1, fp * x.e2, fp * x.e12 + fpp * x.e1 * x.e2};
}

constexpr HyperDual operator-(const HyperDual& x) { return {-x.re, -x.e1, -x.e2, -x.e12}; }
constexpr HyperDual operator+(HyperDual a, const HyperDual& b) { return a += b; }
constexpr HyperDual operator-(HyperDual a, const HyperDual& b) { return a -= b; }
constexpr HyperDual operator*(HyperDual a, const HyperDual& b) { return a *= b; }

inline HyperDual operator/(const HyperDual& a, const HyperDual& b) {
  const double inv = 1.0 / b.re;
  // 1/b expanded: f = 1/b, f' = -1/b², f'' = 2/b³.
  const HyperDual recip = chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
  return a * recip;
}

inline HyperDual& HyperDual::operator/=(const HyperDual& o) { return *this = *this / o; }

inline HyperDual sin(const HyperDual& x) {
  const double s = std::sin(x.re);
  return chain(x, s, std::cos(x.re), -s);
}
inline HyperDual cos(const HyperDual& x) {
  const double c = std::cos(x.re);
  return chain(x, c, -std::sin(x.re), -c);
}
inline HyperDual tan(const HyperDual& x) {
  const double t = std::tan(x.re);
  const double sec2 = 1.0 + t * t;
  return chain(x, t, sec2, 2.0 * t * sec2);
}
inline HyperDual exp(const HyperDual& x) {
  const double e = std::exp(x.re);
  return chain(x, e, e, e);
}
inline HyperDual log(const HyperDual& x) {
  const double inv = 1.0 / x.re;
  return chain(x, std::log(x.re), inv, -inv * inv);
}
inline HyperDual sqrt(const HyperDual& x) {
  const double s = std::sqrt(x.re);
  return chain(x, s, 0.5 / s, -0.25 / (s * x.re));
}
inline HyperDual abs(const HyperDual& x) { return x.re < 0.0 ? -x : x; }

// Integer power; exact in the truncated algebra.
inline HyperDual pow(const HyperDual& x, int n) {
  if (n == 0) return HyperDual(1.0);
  const double f = std::pow(x.re, n);
  const double fp = n * std::pow(x.re, n - 1);
  const double fpp = (n == 1) ? 0.0 : n * (n - 1) * std::pow(x.re, n - 2);
  return chain(x, f, fp, fpp);
}

inline double value_of(double x) { return x; }
inline double value_of(const HyperDual& x) { return x.re; }

inline std::ostream& operator<<(std::ostream& os, const HyperDual& x) {
  return os << "HyperDual(" << x.re << ", " << x.e1 << ", " << x.e2 << ", " << x.e12 << ")";
}

}  // namespace conjscope
