#pragma once

// t-tests and simple linear regression. All p-values are two-sided.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string_view>

#include "special_functions.hpp"

namespace hapdec::stats {

/// Student-t CDF via the regularized incomplete beta.
inline double t_cdf(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("t_cdf: df must be positive");
  if (std::isnan(t)) throw std::invalid_argument("t_cdf: t is NaN");
  if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
  const double x = df / (df + t * t);
  const double tail = 0.5 * special::incomplete_beta(0.5 * df, 0.5, x);
  return t > 0.0 ? 1.0 - tail : tail;
}

/// P(|T| >= |t|).
inline double two_sided_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return special::incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

/// Upper quantile: t such that t_cdf(t, df) = p, by bisection.
inline double t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("t_quantile: p must lie in (0, 1)");
  double lo = -1.0;
  double hi = 1.0;
  while (t_cdf(lo, df) > p) lo *= 2.0;
  while (t_cdf(hi, df) < p) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, std::fabs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (t_cdf(mid, df) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("variance: need at least 2 samples");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

enum class TTestFlavor { one_sample, pooled, welch };

inline std::string_view to_string(TTestFlavor f) {
  switch (f) {
    case TTestFlavor::one_sample: return "one_sample";
    case TTestFlavor::pooled: return "pooled";
    case TTestFlavor::welch: return "welch";
  }
  return "?";
}

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  double mean_diff = 0.0;
  TTestFlavor flavor = TTestFlavor::one_sample;
};

inline TTestResult finish_t(double diff, double se, double df, TTestFlavor flavor) {
  TTestResult r;
  r.mean_diff = diff;
  r.df = df;
  r.flavor = flavor;
  r.t = diff / se;
  r.p = r.t == 0.0 ? 1.0 : two_sided_p(r.t, df);
  return r;
}

inline TTestResult t_test_one_sample(std::span<const double> xs, double mu0) {
  if (xs.size() < 2) throw std::invalid_argument("t_test_one_sample: need at least 2 samples");
  const double var = variance(xs);
  if (!(var > 0.0)) throw std::invalid_argument("t_test_one_sample: zero variance");
  const auto n = static_cast<double>(xs.size());
  return finish_t(mean(xs) - mu0, std::sqrt(var / n), n - 1.0, TTestFlavor::one_sample);
}

inline TTestResult t_test_two_sample(std::span<const double> xs, std::span<const double> ys, TTestFlavor flavor) {
  if (xs.size() < 2 || ys.size() < 2) throw std::invalid_argument("t_test_two_sample: need at least 2 samples each");
  const auto n1 = static_cast<double>(xs.size());
  const auto n2 = static_cast<double>(ys.size());
  const double v1 = variance(xs);
  const double v2 = variance(ys);
  const double diff = mean(xs) - mean(ys);
  if (flavor == TTestFlavor::pooled) {
    const double df = n1 + n2 - 2.0;
    const double sp2 = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / df;
    if (!(sp2 > 0.0)) throw std::invalid_argument("t_test_two_sample: zero pooled variance");
    return finish_t(diff, std::sqrt(sp2 * (1.0 / n1 + 1.0 / n2)), df, flavor);
  }
  if (flavor == TTestFlavor::welch) {
    const double a = v1 / n1;
    const double b = v2 / n2;
    if (!(a + b > 0.0)) throw std::invalid_argument("t_test_two_sample: zero variance in both samples");
    const double df = (a + b) * (a + b) / (a * a / (n1 - 1.0) + b * b / (n2 - 1.0));
    return finish_t(diff, std::sqrt(a + b), df, flavor);
  }
  throw std::invalid_argument("t_test_two_sample: flavor must be pooled or welch");
}

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  double r_squared = 0.0;
  double f_stat = 0.0;
  std::array<double, 2> df{1.0, 0.0};
  std::array<double, 2> ci95_slope{};
  std::array<double, 2> ci95_intercept{};
};

/// Ordinary least squares y = intercept + slope * x.
inline RegressionResult linear_regression(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("linear_regression: size mismatch");
  if (xs.size() < 3) throw std::invalid_argument("linear_regression: need at least 3 points");
  const auto n = static_cast<double>(xs.size());
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("linear_regression: x values are all equal");

  RegressionResult r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (r.intercept + r.slope * xs[i]);
    sse += e * e;
  }
  const double ssr = r.slope * sxy;
  const double dfe = n - 2.0;
  const double mse = sse / dfe;
  r.df = {1.0, dfe};
  r.r_squared = syy > 0.0 ? std::clamp(ssr / syy, 0.0, 1.0) : 0.0;
  if (mse > 0.0) {
    r.f_stat = ssr / mse;
  } else {
    r.f_stat = ssr > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  r.slope_se = std::sqrt(mse / sxx);
  r.intercept_se = std::sqrt(mse * (1.0 / n + mx * mx / sxx));
  const double tc = t_quantile(0.975, dfe);
  r.ci95_slope = {r.slope - tc * r.slope_se, r.slope + tc * r.slope_se};
  r.ci95_intercept = {r.intercept - tc * r.intercept_se, r.intercept + tc * r.intercept_se};
  return r;
}

}  // namespace hapdec::stats
