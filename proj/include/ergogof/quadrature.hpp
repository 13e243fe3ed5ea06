#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <span>

namespace ergogof::quad {

/// Five-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 5> gl5_nodes = {
    -0.9061798459386639927976269, -0.5384693101056830910363144, 0.0,
    0.5384693101056830910363144, 0.9061798459386639927976269};
inline constexpr std::array<double, 5> gl5_weights = {
    0.2369268850561890875142640, 0.4786286704993664680412915, 0.5688888888888888888888889,
    0.4786286704993664680412915, 0.2369268850561890875142640};

/// Integral of `fn` over [a, b] with one 5-point Gauss-Legendre panel.
template <class Fn>
double gl5(Fn&& fn, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < gl5_nodes.size(); ++i) sum += gl5_weights[i] * fn(mid + half * gl5_nodes[i]);
  return sum * half;
}

/// Same as gl5 but splits [a, b] at any breakpoint strictly inside it, so that
/// piecewise-smooth integrands keep full order.
template <class Fn>
double gl5_split(Fn&& fn, double a, double b, std::span<const double> breakpoints) {
  if (a == b) return 0.0;
  const double sign = a < b ? 1.0 : -1.0;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  double left = lo;
  double sum = 0.0;
  for (double bp : breakpoints) {  // breakpoints are sorted
    if (bp <= left) continue;
    if (bp >= hi) break;
    sum += gl5(fn, left, bp);
    left = bp;
  }
  sum += gl5(fn, left, hi);
  return sign * sum;
}

/// Vector-valued gl5_split: `fn` returns std::array<double, K>.
template <std::size_t K, class Fn>
std::array<double, K> gl5_split_vec(Fn&& fn, double a, double b, std::span<const double> breakpoints) {
  std::array<double, K> sum{};
  if (a == b) return sum;
  const double sign = a < b ? 1.0 : -1.0;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  auto panel = [&](double pa, double pb) {
    const double half = 0.5 * (pb - pa);
    const double mid = 0.5 * (pa + pb);
    for (std::size_t i = 0; i < gl5_nodes.size(); ++i) {
      const auto v = fn(mid + half * gl5_nodes[i]);
      for (std::size_t k = 0; k < K; ++k) sum[k] += gl5_weights[i] * half * v[k];
    }
  };
  double left = lo;
  for (double bp : breakpoints) {
    if (bp <= left) continue;
    if (bp >= hi) break;
    panel(left, bp);
    left = bp;
  }
  panel(left, hi);
  for (auto& v : sum) v *= sign;
  return sum;
}

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
  int evaluations = 0;
};

/// Adaptive Gauss-Kronrod (7/15) on a finite interval with bisection of the
/// panel carrying the largest error estimate.
AdaptiveResult adaptive_gk15(const std::function<double(double)>& fn, double a, double b,
                             double rel_tol = 1e-10, double abs_tol = 1e-300, int max_panels = 2000);

}  // namespace ergogof::quad
