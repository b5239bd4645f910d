#include "magtunnel/radial_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "magtunnel/agmon.hpp"
#include "magtunnel/errors.hpp"
#include "magtunnel/quadrature.hpp"

namespace magtunnel {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Finite-volume pencil: row i reads
//   c_out (u_i - u_{i+1}) + c_in (u_i - u_{i-1}) + w_i (v_B(r_i) - mu) u_i = 0,
// with c = h^2 r_{i+-1/2} / dr and cell volume w_i (dr^2/8 at the origin).
// Keeping the rows in this difference form avoids cancelling the O(h^2/dr^2)
// flux terms against each other.
struct RadialPencil {
  Eigen::VectorXd r, weight, potential, flux; // flux[i] couples i and i+1
  double dr = 0;

  Eigen::Index size() const { return r.size(); }
  double flux_in(Eigen::Index i) const { return i == 0 ? 0.0 : flux[i - 1]; }
};

RadialPencil assemble(const PotentialSpec &spec, double h, double dr, Eigen::Index n) {
  RadialPencil p;
  p.dr = dr;
  p.r = Eigen::VectorXd::LinSpaced(n, 0.0, dr * static_cast<double>(n - 1));
  p.weight.resize(n);
  p.potential.resize(n);
  p.flux.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ri = p.r[i];
    p.weight[i] = i == 0 ? dr * dr / 8.0 : ri * dr;
    p.potential[i] = eval_effective(ri, spec);
    p.flux[i] = h * h * (ri + 0.5 * dr) / dr;
  }
  return p;
}

// Number of eigenvalues below x. Pivots of the LDL^T factorisation of
// A - xW are written as flux_out + excess; the excess recurrence is free of
// cancellation.
Eigen::Index sturm_count(const RadialPencil &p, double x) {
  Eigen::Index count = 0;
  double excess = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    double carried = 0.0;
    if (i > 0) {
      const double c = p.flux[i - 1];
      const double prev_pivot = c + excess;
      carried = prev_pivot == 0.0 ? -std::numeric_limits<double>::infinity()
                                  : c * excess / prev_pivot;
    }
    excess = p.weight[i] * (p.potential[i] - x) + carried;
    if (p.flux[i] + excess < 0.0)
      ++count;
  }
  return count;
}

double bisect_eigenvalue(const RadialPencil &p, Eigen::Index k, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    if (sturm_count(p, mid) > k)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

struct Eigenvalues {
  double ground, second;
};

Eigenvalues lowest_two(const RadialPencil &p) {
  // The kinetic part is positive semi-definite.
  const double lo = p.potential.minCoeff() - 1e-12;
  double step = 1.0;
  double hi = lo + step;
  while (sturm_count(p, hi) < 2) {
    step *= 2.0;
    hi = lo + step;
    if (step > 1e12)
      throw NonConvergence("could not bracket the two lowest radial eigenvalues");
  }
  const double ground = bisect_eigenvalue(p, 0, lo, hi);
  const double second = bisect_eigenvalue(p, 1, ground, hi);
  return {ground, second};
}

// log|u| with u_0 = 1, built outward up to the turning node and inward from
// the Dirichlet end, so each recurrence runs in its stable direction. Both
// carry relative increments (u_{i+1} - u_i)/u_i rather than raw ratios.
Eigen::VectorXd ground_state_log(const RadialPencil &p, double mu, const PotentialSpec &spec,
                                 std::vector<int> &sign) {
  const Eigen::Index n = p.size();
  auto source = [&](Eigen::Index i) { return p.weight[i] * (p.potential[i] - mu); };

  Eigen::Index turn = 1;
  while (turn < n - 3 && eval_effective(p.r[turn], spec) < mu)
    ++turn;
  turn = std::clamp<Eigen::Index>(turn, 2, n - 3);

  Eigen::VectorXd logu(n);
  sign.assign(static_cast<std::size_t>(n), 1);
  logu[0] = 0.0;
  double g = 0.0; // (u_{i+1} - u_i) / u_i
  for (Eigen::Index i = 0; i < turn; ++i) {
    const double carried = i == 0 ? 0.0 : p.flux[i - 1] * g / (1.0 + g);
    g = (carried + source(i)) / p.flux[i];
    logu[i + 1] = logu[i] + std::log(std::abs(1.0 + g));
    sign[i + 1] = sign[i] * (1.0 + g < 0 ? -1 : 1);
  }
  // k_i = (u_{i-1} - u_i) / u_i, starting from u_n = 0.
  std::vector<double> k(static_cast<std::size_t>(n), 0.0);
  double ki = (p.flux[n - 1] + source(n - 1)) / p.flux[n - 2];
  k[static_cast<std::size_t>(n - 1)] = ki;
  for (Eigen::Index i = n - 2; i > turn; --i) {
    ki = (p.flux[i] * ki / (1.0 + ki) + source(i)) / p.flux[i - 1];
    k[static_cast<std::size_t>(i)] = ki;
  }
  for (Eigen::Index i = turn + 1; i < n; ++i) {
    const double ratio = 1.0 + k[static_cast<std::size_t>(i)]; // u_{i-1} / u_i
    logu[i] = logu[i - 1] - std::log(std::abs(ratio));
    sign[i] = sign[i - 1] * (ratio < 0 ? -1 : 1);
  }
  return logu;
}

struct GridSolution {
  Eigenvalues mu;
  RadialPencil pencil;
  Eigen::VectorXd u;
  double norm_2d = 0, residual = 0;
};

GridSolution solve_on_grid(const PotentialSpec &spec, double h, double dr, Eigen::Index n,
                           bool with_vector) {
  GridSolution sol;
  sol.pencil = assemble(spec, h, dr, n);
  sol.mu = lowest_two(sol.pencil);
  if (!std::isfinite(sol.mu.ground) || !(sol.mu.second > sol.mu.ground))
    throw NonConvergence("radial bisection produced no ordered eigenpair");
  if (!with_vector)
    return sol;

  const auto &p = sol.pencil;
  std::vector<int> sign;
  Eigen::VectorXd logu = ground_state_log(p, sol.mu.ground, spec, sign);
  const double peak = logu.maxCoeff();
  sol.u.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    sol.u[i] = sign[static_cast<std::size_t>(i)] * std::exp(logu[i] - peak);
  double norm = two_pi * (p.weight.array() * sol.u.array().square()).sum();
  sol.u /= std::sqrt(norm);
  if (sol.u[0] < 0)
    sol.u = -sol.u;
  sol.norm_2d = two_pi * (p.weight.array() * sol.u.array().square()).sum();

  // Residual on the symmetric form, assembled from node differences so the
  // large flux coefficients do not cancel in floating point.
  double res2 = 0.0, norm2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double ax = p.weight[i] * (p.potential[i] - sol.mu.ground) * sol.u[i];
    ax += p.flux[i] * (sol.u[i] - (i + 1 < n ? sol.u[i + 1] : 0.0));
    if (i > 0)
      ax += p.flux[i - 1] * (sol.u[i] - sol.u[i - 1]);
    res2 += ax * ax / p.weight[i];
    norm2 += p.weight[i] * sol.u[i] * sol.u[i];
  }
  sol.residual = std::sqrt(res2 / norm2) / std::abs(sol.mu.ground);
  return sol;
}

} // namespace

double default_radial_spacing(double h) { return std::clamp(0.02 * std::pow(h, 1.5), 2e-5, 1.5e-4); }

double default_radial_extent(const PotentialSpec &spec, double h) {
  return 2.0 * spec.L + spec.a + 6.0 * std::sqrt(h / spec.B);
}

RadialState solve_radial(const PotentialSpec &spec, double h, const RadialGridParams &params) {
  if (!(h > 0.0))
    throw DomainError("h must be positive");
  const double r_max = params.r_max > 0.0 ? params.r_max : default_radial_extent(spec, h);
  if (r_max < 2.0 * spec.L + spec.a)
    throw DomainError("radial grid must reach 2L + a");
  double dr = params.spacing > 0.0 ? params.spacing : default_radial_spacing(h);
  Eigen::Index n = static_cast<Eigen::Index>(std::ceil(r_max / dr));
  if (n % 2 == 1)
    ++n; // the coarse Richardson grid needs an even count
  dr = r_max / static_cast<double>(n);
  if (dr > std::sqrt(h / spec.B) / 10.0)
    throw GridTooCoarse("radial spacing " + std::to_string(dr) +
                        " does not resolve the oscillator length sqrt(h/B)");

  GridSolution fine = solve_on_grid(spec, h, dr, n, true);

  RadialState st;
  st.h = h;
  st.spacing = dr;
  st.r = fine.pencil.r;
  st.u = std::move(fine.u);
  st.mu_h_grid = fine.mu.ground;
  st.mu_h1_grid = fine.mu.second;
  st.mu_h = fine.mu.ground;
  st.mu_h1 = fine.mu.second;
  st.norm_2d = fine.norm_2d;
  st.residual = fine.residual;

  if (params.richardson) {
    const GridSolution coarse = solve_on_grid(spec, h, 2.0 * dr, n / 2, false);
    st.mu_h += (fine.mu.ground - coarse.mu.ground) / 3.0;
    st.mu_h1 += (fine.mu.second - coarse.mu.second) / 3.0;
    st.richardson_shift = std::abs(st.mu_h - st.mu_h_grid);
    if (st.richardson_shift > params.richardson_tolerance)
      throw GridTooCoarse("Richardson correction of mu_h is " +
                          std::to_string(st.richardson_shift) + " (> " +
                          std::to_string(params.richardson_tolerance) + ")");
  }
  if (!(st.u.array() > 0.0).all())
    throw NonConvergence("radial ground state is not positive on the grid");
  return st;
}

Eigen::Index RadialState::node_at_or_above(double radius) const {
  const auto i = static_cast<Eigen::Index>(std::ceil(radius / spacing - 1e-9));
  return std::clamp<Eigen::Index>(i, 0, r.size() - 1);
}

double RadialState::value_at(double radius) const {
  if (radius < 0.0 || radius > r[r.size() - 1])
    throw DomainError("radius " + std::to_string(radius) + " is outside the radial grid");
  const Eigen::Index n = r.size();
  Eigen::Index i = static_cast<Eigen::Index>(std::floor(radius / spacing));
  const Eigen::Index base = std::clamp<Eigen::Index>(i - 1, 0, n - 4);
  // Lagrange cubic through four nodes, on log u (the tail is exponential).
  double out = 0.0;
  for (Eigen::Index j = 0; j < 4; ++j) {
    double w = 1.0;
    for (Eigen::Index k = 0; k < 4; ++k)
      if (k != j)
        w *= (radius - r[base + k]) / (r[base + j] - r[base + k]);
    out += w * std::log(u[base + j]);
  }
  return std::exp(out);
}

double RadialState::log_derivative_at_node(Eigen::Index i) const {
  if (i < 2 || i + 2 >= r.size())
    throw DomainError("five-point stencil leaves the radial grid");
  const double du = (u[i - 2] - 8.0 * u[i - 1] + 8.0 * u[i + 1] - u[i + 2]) / (12.0 * spacing);
  return du / u[i];
}

double wkb_prefactor_origin(const PotentialSpec &spec) {
  return std::sqrt(spec.harmonic_frequency() / two_pi);
}

double wkb_log_integrand(double s, const PotentialSpec &spec) {
  const double excess = eval_effective_excess(s, spec);
  const double slope = eval_effective_derivative(s, spec);
  return slope / (4.0 * excess) + 0.5 / s - spec.harmonic_frequency() / (2.0 * std::sqrt(excess));
}

namespace {

// int_0^r of the WKB log integrand. Near the origin the integrand vanishes
// linearly, so (0, eps] contributes eps F(eps) / 2.
double wkb_log_integral(double r0, double r1, const PotentialSpec &spec) {
  const double eps = 1e-4 * (spec.a > 0.0 ? spec.a : 1.0);
  double total = 0.0;
  if (r0 < eps) {
    const double upto = std::min(eps, r1);
    total += 0.5 * (upto * wkb_log_integrand(upto, spec) - (r0 > 0 ? r0 * wkb_log_integrand(r0, spec) : 0.0));
    r0 = upto;
  }
  if (r1 <= r0)
    return total;
  std::vector<double> pts{r0};
  if (spec.a > r0 && spec.a < r1)
    pts.push_back(spec.a);
  pts.push_back(r1);
  auto f = [&](double s) { return wkb_log_integrand(s, spec); };
  const auto res = integrate(f, std::span<const double>(pts), QuadratureOptions{1e-12, 1e-13, 4000});
  if (!res.converged)
    throw SingularIntegrand("WKB prefactor quadrature did not converge on [" +
                            std::to_string(r0) + ", " + std::to_string(r1) + "]");
  return total + res.value;
}

} // namespace

double wkb_prefactor(double r, const PotentialSpec &spec) {
  if (r < 0.0)
    throw DomainError("wkb_prefactor needs r >= 0");
  return wkb_prefactor_origin(spec) * std::exp(-wkb_log_integral(0.0, r, spec));
}

double wkb_residual(const RadialState &state, const PotentialSpec &spec, double r_max) {
  if (r_max < 0.0 || r_max > state.r[state.r.size() - 1])
    throw DomainError("wkb_residual: r_max outside the radial grid");
  const Eigen::Index last = static_cast<Eigen::Index>(std::floor(r_max / state.spacing + 1e-9));
  const Eigen::Index samples = std::min<Eigen::Index>(last, 400);
  const double h = state.h;
  const double log_k0 = std::log(wkb_prefactor_origin(spec));
  double d = 0.0, log_integral = 0.0, prev = 0.0, sup = 0.0;
  for (Eigen::Index s = 0; s <= samples; ++s) {
    const Eigen::Index i = samples == 0 ? 0 : (last * s) / samples;
    const double r = state.r[i];
    if (r > prev) {
      d += agmon_distance(prev, r, spec);
      log_integral += wkb_log_integral(prev, r, spec);
      prev = r;
    }
    const double scaled = std::exp(d / h + std::log(state.u[i]));
    const double wkb = std::exp(log_k0 - log_integral) / std::sqrt(h);
    sup = std::max(sup, std::abs(scaled - wkb));
  }
  return sup;
}

} // namespace magtunnel
