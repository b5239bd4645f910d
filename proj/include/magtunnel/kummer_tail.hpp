#pragma once

#include <complex>

#include "magtunnel/log_scalar.hpp"
#include "magtunnel/potential.hpp"
#include "magtunnel/radial_solver.hpp"

namespace magtunnel {

/// exp(log_scale) * {plain, weighted} approximates
///   int_0^inf exp(-B z (1+2t) / (4h)) t^{alpha-1} (1+t)^{-alpha} (1+2t)^k dt
/// for k = 0 (plain) and k = 1 (weighted), z = |X|^2 possibly complex.
struct TailIntegrals {
  double log_scale = 0;
  std::complex<double> plain, weighted;
};

/// Evaluates both integrals after t = e^s, truncated where the real
/// log-integrand falls 60 nats below its peak. Requires Re z > 0, alpha > 0.
TailIntegrals tail_integrals(std::complex<double> z, double alpha, double B, double h);

/// The log_scale tail_integrals() would use for Re z = re_z: the peak of the
/// real log-integrand. Decreasing in re_z.
double tail_log_envelope(double re_z, double alpha, double B, double h);

struct LaplaceInternals {
  double t_L = 0;            ///< critical point of f
  double fpp_tL = 0;         ///< f''(t_L), closed form
  double fpp_tL_direct = 0;  ///< f''(t) formula evaluated at t_L
  double f_tL = 0;           ///< f(t_L), equals the free distance at L
  double fprime_residual = 0;
  double nu = 0;             ///< 1/2 - sqrt(B^2 + 2 v''(0)) / (2B)
};

/// f(t) = B L^2 (1+2t)/4 + |v0|/(2B) ln((1+t)/t) and its minimiser.
LaplaceInternals laplace_internals(const PotentialSpec &spec);
double laplace_phase(double t, const PotentialSpec &spec);
double laplace_phase_derivative(double t, const PotentialSpec &spec);

struct TailModel {
  double h = 0;
  double mu_h = 0;
  double alpha = 0;          ///< 1/2 - mu_h / (2 B h)
  LogScalar C_h_matched;     ///< normalisation fixed by continuity with u
  LogScalar C_h_asymptotic;  ///< semiclassical equivalent of C_h
  double t_L = 0, fpp_tL = 0, nu = 0;
  double match_radius = 0;
  double match_residual = 0; ///< |u'/u - I'/I| at match_radius
};

/// phi(r) for r > a, as C_h times the integral representation.
LogScalar tail_value(double r, const TailModel &model, const PotentialSpec &spec, double h);
/// d phi / dr for r > a (negative).
LogScalar tail_derivative(double r, const TailModel &model, const PotentialSpec &spec, double h);

/// |-h^2 (phi'' + phi'/r) + (v_B - mu_h) phi| / |(v_B - mu_h) phi| at r > a, with
/// phi'' and phi' from five-point differences of phi / phi(r) on a step of h / 100.
double tail_ode_residual(double r, const TailModel &model, const PotentialSpec &spec, double h);

/// Fixes C_h so the representation equals u at the first grid node beyond a.
/// Throws MatchFailure when the log-derivatives disagree by more than 1e-2.
TailModel match_normalization(const RadialState &state, const PotentialSpec &spec, double h);

/// C_h ~ h^{-1} K(L) sqrt(f''(t_L)/2pi) t_L^{1-nu} (1+t_L)^nu exp((dt(L) - d(0,L))/h).
LogScalar asymptotic_C_h(const PotentialSpec &spec, double h, double K_L);

} // namespace magtunnel
