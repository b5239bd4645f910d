#pragma once

#include <Eigen/Core>

#include "magtunnel/potential.hpp"

namespace magtunnel {

struct RadialGridParams {
  double spacing = 0.0; ///< 0 selects default_radial_spacing(h)
  double r_max = 0.0;   ///< 0 selects default_radial_extent(spec, h)
  /// Solve again at twice the spacing and extrapolate the eigenvalues.
  bool richardson = true;
  /// GridTooCoarse is raised when the extrapolation moves mu_h by more.
  double richardson_tolerance = 1e-8;
};

double default_radial_spacing(double h);
/// 2L + a + 6 sqrt(h/B).
double default_radial_extent(const PotentialSpec &spec, double h);

/// m = 0 ground state of -h^2 r^{-1} (r u')' + v_B u = mu u on [0, r_max],
/// regular at the origin and Dirichlet at r_max.
struct RadialState {
  double h = 0;
  double spacing = 0;
  Eigen::VectorXd r;  ///< nodes 0, dr, ..., r_max - dr
  Eigen::VectorXd u;  ///< ground state, 2 pi int u^2 r dr = 1, u > 0
  double mu_h = 0;    ///< extrapolated ground eigenvalue
  double mu_h1 = 0;   ///< extrapolated second m = 0 eigenvalue
  double mu_h_grid = 0;
  double mu_h1_grid = 0;
  double richardson_shift = 0; ///< |mu_h - mu_h_grid|
  double norm_2d = 0;
  double residual = 0; ///< ||(T - mu) x|| / (|mu| ||x||) on the symmetric form

  double r_max() const { return spacing * static_cast<double>(r.size()); }
  /// Cubic interpolation of log u; r must lie inside the grid.
  double value_at(double r) const;
  /// u'(r_i)/u(r_i) at an interior node from a five-point stencil.
  double log_derivative_at_node(Eigen::Index i) const;
  /// First node index with r_i >= r.
  Eigen::Index node_at_or_above(double r) const;
};

/// Solves the radial eigenproblem with a conservative finite-volume scheme
/// (second order). Eigenvalues come from Sturm bisection; the eigenvector
/// from two-sided ratio recurrences so the tail stays accurate far below
/// machine epsilon relative to the peak.
RadialState solve_radial(const PotentialSpec &spec, double h,
                         const RadialGridParams &params = {});

/// WKB amplitude K(r) for phi ~ h^{-1/2} K(r) exp(-d(0,r)/h).
double wkb_prefactor(double r, const PotentialSpec &spec);
/// K(0) = sqrt(sqrt(B^2 + 2 v''(0)) / (2 pi)): the normalised harmonic ground state.
double wkb_prefactor_origin(const PotentialSpec &spec);
/// Integrand of -log(K(r)/K(0)); the three terms cancel as s -> 0.
double wkb_log_integrand(double s, const PotentialSpec &spec);

/// sup_{r <= r_max} |exp(d(0,r)/h) u(r) - h^{-1/2} K(r)|, formed in log space.
double wkb_residual(const RadialState &state, const PotentialSpec &spec, double r_max);

} // namespace magtunnel
