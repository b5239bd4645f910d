#pragma once

#include "magtunnel/potential.hpp"

namespace magtunnel {

/// d(r1, r2) = int_{r1}^{r2} sqrt(B^2 r^2 / 4 + v(r) - v0) dr, adaptive
/// quadrature split at the support edge r = a.
double agmon_distance(double r1, double r2, const PotentialSpec &spec);

/// Free distance int_0^r sqrt(B^2 s^2 / 4 - v0) ds in closed form.
double free_distance(double r, const PotentialSpec &spec);
/// Same integral by adaptive quadrature; kept as an independent check.
double free_distance_quadrature(double r, const PotentialSpec &spec);

/// The three algebraically equal expressions of the tunnelling action.
struct ActionForms {
  double defining = 0;       // 2 d(0,L) + int_0^L [sqrt(B^2(2L-r)^2/4 - v0) - sqrt(B^2 r^2/4 - v0)] dr
  double mixed = 0;          // d(0,2L) + d(0,L) - dt(L)
  double doubled = 0;        // 2 d(0,2L) - dt(2L)
  double max_discrepancy() const;
};

ActionForms action_forms(const PotentialSpec &spec);

/// Tunnelling action; throws InternalInconsistency if the three forms
/// disagree by more than 1e-10.
double action_S(const PotentialSpec &spec);

struct AgmonReport {
  double d_0_L = 0, d_0_a = 0, d_0_2L = 0, d_0_2Lma = 0, d_2Lma_2L = 0;
  double dt_L = 0, dt_2L = 0, dt_2Lma = 0;
  double S = 0;
  double gamma0 = 0;
  // Sandwich bounds on S.
  double agmon_lower = 0, agmon_upper = 0;   // d(0,2L-a)+d(0,a), d(0,2L)
  double crude_lower = 0, crude_upper = 0;   // BL^2-BLa, BL^2+2 sqrt|v0| L + gamma0
  bool bounds_ok = false;
  bool separation_ok = false; // S < 2 d(0, 2L-a)
  bool geometry_ok = false;   // L > (1 + sqrt(3)/2) a
};

AgmonReport check_bounds(const PotentialSpec &spec);

struct SeparationReport {
  bool geometric = false; // L > (1 + sqrt(3)/2) a
  bool integral = false;  // d(2L-a, 2L) < dt(2L-a)
  bool raw = false;       // S < 2 d(0, 2L-a)
  /// geometric => integral => raw.
  bool chain_holds() const { return (!geometric || integral) && (!integral || raw); }
};

SeparationReport check_separation(const PotentialSpec &spec);

/// (1 + sqrt(3)/2): the separation ratio L/a above which the hopping term
/// provably dominates the interaction error.
inline constexpr double separation_threshold = 1.8660254037844386;

} // namespace magtunnel
