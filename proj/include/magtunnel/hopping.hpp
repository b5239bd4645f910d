#pragma once

#include "magtunnel/kummer_tail.hpp"
#include "magtunnel/log_scalar.hpp"
#include "magtunnel/potential.hpp"
#include "magtunnel/radial_solver.hpp"

namespace magtunnel {

enum class Side { left, right };

/// Gauge function relating the well-centred radial gauge to the Landau gauge.
double gauge_phase(Side side, double x, double y, const PotentialSpec &spec);

/// phi_l = e^{-i sigma_l/h} phi(x+L, y), phi_r = e^{-i sigma_r/h} phi(x-L, y).
/// Uses the tail representation beyond the support and `interior` inside it;
/// throws DomainError when an interior point is requested without a state.
LogComplex translated_state(Side side, double x, double y, const TailModel &model,
                            const PotentialSpec &spec, double h,
                            const RadialState *interior = nullptr);

struct SaddleInfo {
  double N = 0;         ///< |v0| / (B^2 L^2)
  double t_star = 0;
  double g_star = 0;    ///< g(t*, t*) in closed form
  double hess_det = 0;  ///< determinant of the Hessian of g at (t*, t*)
  double gradient_residual = 0;
};

/// g(t, s) = B L^2/2 (1+t+s + 1/(1+t+s)) + |v0|/(2B) (ln((1+t)/t) + ln((1+s)/s)).
double saddle_phase(double t, double s, const PotentialSpec &spec);
/// omega = (1+t+s)^{1/2} - (1+t+s)^{-3/2}.
double hopping_weight(double t, double s);
SaddleInfo saddle(const PotentialSpec &spec);

/// h^2 int [conj(phi_r) d_x phi_l - phi_l conj(d_x phi_r)](0, y) dy, with the
/// y-contour moved to Im y = -L/(1+2t*) so the oscillating phase no longer
/// cancels the integrand by many orders of magnitude.
LogComplex hopping_line_integral(const TailModel &model, const PotentialSpec &spec, double h);

/// The (t, s) double integral left after the y-integration, with the exact
/// alpha. `symmetrized` integrates one triangle and doubles it.
LogScalar hopping_reduced_integral(const TailModel &model, const PotentialSpec &spec, double h,
                                   bool symmetrized = true);

/// Laplace evaluation of the reduced integral around (t*, t*).
LogScalar hopping_asymptotic(const TailModel &model, const PotentialSpec &spec, double h,
                             LogScalar C_h);

/// C(B, L, v) with |w_h| ~ C h^{1/2} e^{-S/h}.
double tunneling_constant(const PotentialSpec &spec);

struct HoppingReport {
  double h = 0;
  LogComplex w_line;
  LogScalar w_reduced;
  LogScalar w_laplace;          ///< with the matched C_h
  LogScalar w_laplace_asym;     ///< with the asymptotic C_h
  double t_star = 0, g_star = 0, hess_det = 0;
  double C_BLv = 0;
  LogScalar gap_pred;           ///< 2 |w_reduced|
  double S = 0;
  double d_0_2Lma = 0;
};

/// Runs every route for one h. `with_line` skips the (slower) line integral.
HoppingReport compute_hopping(const TailModel &model, const PotentialSpec &spec, double h,
                              bool with_line = true);

struct GapPrediction {
  double lambda1 = 0, lambda2 = 0;
  LogScalar gap;
  double rho = 0;        ///< h^{-3} e^{-2 d(0,2L-a)/h} / |w|
  double log10_rho = 0;
  bool reliable = false; ///< rho < 0.1
};

GapPrediction gap_prediction(const HoppingReport &report, double mu_h);

} // namespace magtunnel
