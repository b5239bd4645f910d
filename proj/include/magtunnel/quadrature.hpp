#pragma once

// Globally adaptive Gauss-Kronrod (G7/K15) quadrature, generic over the
// integrand's value type (double or std::complex<double>).

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <queue>
#include <span>
#include <type_traits>
#include <vector>

#include "magtunnel/errors.hpp"

namespace magtunnel {

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 0.0;
  int max_intervals = 4000;
};

template <typename T> struct QuadratureResult {
  T value{};
  double error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd Kronrod nodes 1, 3, 5, 7.
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T> struct Panel {
  double lo, hi;
  T value;
  double error;
  bool operator<(const Panel &other) const { return error < other.error; }
};

template <typename T, typename F> Panel<T> kronrod_panel(F &f, double lo, double hi) {
  const double centre = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const T fc = f(centre);
  T kronrod = kronrod_weights[7] * fc;
  T gauss = gauss_weights[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kronrod_nodes[j];
    const T sum = f(centre - dx) + f(centre + dx);
    kronrod += kronrod_weights[j] * sum;
    if (j % 2 == 1)
      gauss += gauss_weights[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return {lo, hi, kronrod, std::abs(kronrod - gauss)};
}

} // namespace detail

/// Integrates f over the union of [points[i], points[i+1]]. Panels with the
/// largest error estimate are bisected until the summed estimate drops below
/// max(abs_tol, rel_tol * |result|). Bisection order is deterministic.
template <typename F>
auto integrate(F &&f, std::span<const double> points, const QuadratureOptions &opts = {})
    -> QuadratureResult<std::decay_t<decltype(f(0.0))>> {
  using T = std::decay_t<decltype(f(0.0))>;
  QuadratureResult<T> out;
  std::priority_queue<detail::Panel<T>> panels;
  T total{};
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (points[i + 1] == points[i])
      continue;
    auto p = detail::kronrod_panel<T>(f, points[i], points[i + 1]);
    out.evaluations += 15;
    total += p.value;
    error += p.error;
    panels.push(p);
  }
  auto done = [&] {
    return error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
  };
  int intervals = static_cast<int>(panels.size());
  while (!panels.empty() && !done() && intervals < opts.max_intervals) {
    const auto worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      // Panel is already at floating-point resolution.
      panels.push(worst);
      break;
    }
    auto left = detail::kronrod_panel<T>(f, worst.lo, mid);
    auto right = detail::kronrod_panel<T>(f, mid, worst.hi);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++intervals;
  }
  // Re-sum to shed drift from the running updates.
  T resum{};
  double err = 0.0;
  while (!panels.empty()) {
    resum += panels.top().value;
    err += panels.top().error;
    panels.pop();
  }
  out.value = resum;
  out.error = err;
  out.converged = std::isfinite(std::abs(resum)) &&
                  err <= std::max(opts.abs_tol, opts.rel_tol * std::abs(resum));
  return out;
}

template <typename F>
auto integrate(F &&f, double lo, double hi, const QuadratureOptions &opts = {}) {
  const std::array<double, 2> pts{lo, hi};
  return integrate(std::forward<F>(f), std::span<const double>(pts), opts);
}

template <typename F>
auto integrate(F &&f, std::initializer_list<double> points, const QuadratureOptions &opts = {}) {
  const std::vector<double> pts(points);
  return integrate(std::forward<F>(f), std::span<const double>(pts), opts);
}

/// Same as integrate() but throws QuadratureFailure instead of returning an
/// unconverged result.
template <typename F, typename Points>
auto integrate_or_throw(F &&f, const Points &points, const QuadratureOptions &opts,
                        const char *what) {
  auto res = integrate(std::forward<F>(f), std::span<const double>(points), opts);
  if (!res.converged)
    throw QuadratureFailure(std::string(what) + ": error estimate " +
                            std::to_string(res.error) + " after " +
                            std::to_string(res.evaluations) + " evaluations");
  return res.value;
}

} // namespace magtunnel
