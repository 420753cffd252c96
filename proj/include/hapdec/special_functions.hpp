#pragma once

// Error function, normal CDF and the regularized incomplete beta function.
//
// erfc uses the positive-term series for small arguments and a continued
// fraction (modified Lentz) in the tail. The incomplete beta uses the usual
// continued fraction with the symmetry swap, and a Stirling/log1p form of the
// log-beta for large parameters so Student-t tails stay accurate at huge df.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hapdec::special {

namespace detail {

inline constexpr double kTiny = 1e-300;
inline constexpr double kEps = 1e-16;

// erf(x) = 2x/sqrt(pi) e^{-x^2} sum_n (2x^2)^n / (1*3*...*(2n+1)); every term positive.
inline double erf_series(double x) {
  const double x2 = x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < 500; ++n) {
    term *= 2.0 * x2 / (2.0 * n + 1.0);
    sum += term;
    if (term < kEps * sum) break;
  }
  return 2.0 * x / std::sqrt(std::numbers::pi) * std::exp(-x2) * sum;
}

// erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), x > 0.
inline double erfc_continued_fraction(double x) {
  double f = x;
  double c = x;
  double d = 0.0;
  for (int n = 1; n < 5000; ++n) {
    const double a = 0.5 * n;
    d = x + a * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = x + a / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x * x) / std::sqrt(std::numbers::pi) / f;
}

inline constexpr double kSeriesCutoff = 2.5;

// Stirling remainder lnGamma(x) - [(x-1/2)ln x - x + ln(2pi)/2], x >= 15.
inline double stirling_tail(double x) {
  const double r = 1.0 / x;
  const double r2 = r * r;
  return r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 / 1680.0)));
}

}  // namespace detail

/// Complementary error function. Absolute error is a few ulp of 1.
inline double erfc(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) return 2.0 - erfc(-x);
  if (x < detail::kSeriesCutoff) return 1.0 - detail::erf_series(x);
  return detail::erfc_continued_fraction(x);
}

inline double erf(double x) {
  if (std::isnan(x)) return x;
  if (std::fabs(x) < detail::kSeriesCutoff) return detail::erf_series(x);
  return x > 0.0 ? 1.0 - detail::erfc_continued_fraction(x)
                 : detail::erfc_continued_fraction(-x) - 1.0;
}

/// Standard normal CDF H(z). Throws std::invalid_argument on non-finite z.
inline double std_normal_cdf(double z) {
  if (!std::isfinite(z)) throw std::invalid_argument("std_normal_cdf: argument must be finite");
  return 0.5 * erfc(-z / std::numbers::sqrt2);
}

/// ln B(a, b) for a, b > 0.
inline double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("log_beta: parameters must be positive");
  const double big = std::max(a, b);
  const double small = std::min(a, b);
  if (big < 15.0) return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  // lnGamma(big) - lnGamma(big+small) without the O(big*ln big) cancellation.
  const double diff = -(big + small - 0.5) * std::log1p(small / big) - small * std::log(big) +
                      small + detail::stirling_tail(big) - detail::stirling_tail(big + small);
  return std::lgamma(small) + diff;
}

namespace detail {

inline double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < 100000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-15) return h;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * detail::beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front) * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

}  // namespace hapdec::special
