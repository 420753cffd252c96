#pragma once

// Derivative-free simplex minimizer (Nelder-Mead, standard coefficients).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace hapdec::optim {

template <std::size_t N>
using Point = std::array<double, N>;

template <std::size_t N>
struct SimplexResult {
  Point<N> x{};
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct SimplexOptions {
  double diameter_tol = 1e-9;
  int max_iterations = 2000;
};

namespace detail {

template <std::size_t N>
double distance(const Point<N>& a, const Point<N>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

template <std::size_t N>
Point<N> affine(const Point<N>& base, const Point<N>& toward, double t) {
  Point<N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = base[i] + t * (toward[i] - base[i]);
  return out;
}

}  // namespace detail

/// Minimizes f starting from x0 with initial edge lengths `step`.
/// Stops when the largest vertex-to-vertex distance falls below diameter_tol.
template <std::size_t N, typename F>
SimplexResult<N> nelder_mead(F&& f, const Point<N>& x0, const Point<N>& step,
                             const SimplexOptions& opts = {}) {
  constexpr std::size_t M = N + 1;
  std::array<Point<N>, M> verts{};
  std::array<double, M> vals{};
  verts[0] = x0;
  for (std::size_t i = 0; i < N; ++i) {
    verts[i + 1] = x0;
    verts[i + 1][i] += step[i];
  }
  for (std::size_t i = 0; i < M; ++i) vals[i] = f(verts[i]);

  std::array<std::size_t, M> order{};
  auto sort_simplex = [&] {
    for (std::size_t i = 0; i < M; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    std::array<Point<N>, M> v2{};
    std::array<double, M> f2{};
    for (std::size_t i = 0; i < M; ++i) {
      v2[i] = verts[order[i]];
      f2[i] = vals[order[i]];
    }
    verts = v2;
    vals = f2;
  };
  auto diameter = [&] {
    double d = 0.0;
    for (std::size_t i = 0; i < M; ++i)
      for (std::size_t j = i + 1; j < M; ++j) d = std::max(d, detail::distance(verts[i], verts[j]));
    return d;
  };

  SimplexResult<N> res;
  int it = 0;
  sort_simplex();
  while (true) {
    if (diameter() < opts.diameter_tol) {
      res.converged = true;
      break;
    }
    if (it >= opts.max_iterations) break;
    ++it;

    Point<N> centroid{};
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = 0; k < N; ++k) centroid[k] += verts[i][k] / static_cast<double>(N);

    const Point<N> reflected = detail::affine(centroid, verts[N], -1.0);
    const double fr = f(reflected);
    if (fr < vals[0]) {
      const Point<N> expanded = detail::affine(centroid, verts[N], -2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        verts[N] = expanded;
        vals[N] = fe;
      } else {
        verts[N] = reflected;
        vals[N] = fr;
      }
    } else if (fr < vals[N - 1]) {
      verts[N] = reflected;
      vals[N] = fr;
    } else {
      const bool outside = fr < vals[N];
      const Point<N> contracted = outside ? detail::affine(centroid, reflected, 0.5)
                                          : detail::affine(centroid, verts[N], 0.5);
      const double fc = f(contracted);
      if (fc < (outside ? fr : vals[N])) {
        verts[N] = contracted;
        vals[N] = fc;
      } else {
        for (std::size_t i = 1; i < M; ++i) {
          verts[i] = detail::affine(verts[0], verts[i], 0.5);
          vals[i] = f(verts[i]);
        }
      }
    }
    sort_simplex();
  }
  res.x = verts[0];
  res.value = vals[0];
  res.iterations = it;
  return res;
}

}  // namespace hapdec::optim
