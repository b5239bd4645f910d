#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "magtunnel/potential.hpp"

namespace magtunnel {

using Complex = std::complex<double>;
using SparseOperator = Eigen::SparseMatrix<Complex>;

/// Which wells enter the planar potential.
enum class WellSet { both, right, none };

/// Dirichlet box [-half_width_x, half_width_x] x [-half_width_y, half_width_y]
/// with nx * ny interior nodes.
struct GridSpec {
  double half_width_x = 0;
  double half_width_y = 0;
  int nx = 0;
  int ny = 0;
  int order = 4;

  double spacing_x() const { return 2.0 * half_width_x / (nx + 1); }
  double spacing_y() const { return 2.0 * half_width_y / (ny + 1); }
  double x(int i) const { return -half_width_x + (i + 1) * spacing_x(); }
  double y(int j) const { return -half_width_y + (j + 1) * spacing_y(); }
  Eigen::Index size() const { return static_cast<Eigen::Index>(nx) * ny; }
  Eigen::Index index(int i, int j) const { return static_cast<Eigen::Index>(i) * ny + j; }
};

/// Largest admissible spacing: min(sqrt(h/B)/6, pi h / (4 B L)).
double max_planar_spacing(const PotentialSpec &spec, double h);
/// Smallest admissible box: L + a + 5 sqrt(h/B) in x, a + 5 sqrt(h/B) in y.
double min_half_width_x(const PotentialSpec &spec, double h);
double min_half_width_y(const PotentialSpec &spec, double h);

/// Throws GridTooCoarse unless spacing and box satisfy the limits above.
void check_grid(const GridSpec &grid, const PotentialSpec &spec, double h);

/// Refinement ladder of `levels` grids on the smallest admissible box. The
/// coarsest grid just meets the spacing limit; each further level halves it.
std::vector<GridSpec> default_ladder(const PotentialSpec &spec, double h, int levels = 3,
                                     int order = 4);
/// Ladder from explicit nx values; (nx + 1) must double from one level to the
/// next. The box is the smallest admissible one and ny follows the coarsest grid.
std::vector<GridSpec> ladder_from_nx(const PotentialSpec &spec, double h,
                                     const std::vector<int> &nx_values, int order = 4);

/// H = (-ih d_x)^2 + (-ih d_y - Bx)^2 + V on the grid: central differences in x,
/// Peierls-phased differences in y, Dirichlet walls with odd ghost values.
SparseOperator build_hamiltonian(const PotentialSpec &spec, double h, const GridSpec &grid,
                                 WellSet wells = WellSet::both);

/// max over `pairs` random pairs of |<u,Hv> - conj(<v,Hu>)| / (|u| |H| |v|).
double hermiticity_defect(const SparseOperator &H, int pairs = 20, std::uint64_t seed = 7);

/// e^{i chi/h} H e^{-i chi/h} with chi = B x y / 2: the operator in the gauge
/// A + grad chi.
SparseOperator gauge_transform(const SparseOperator &H, const PotentialSpec &spec, double h,
                               const GridSpec &grid);

/// psi -> conj(psi(-x, y)).
Eigen::VectorXcd magnetic_reflection(const Eigen::VectorXcd &psi, const GridSpec &grid);

struct EigenOptions {
  int k = 3;
  double tol = 1e-9;   ///< absolute residual bound ||H psi - lambda psi|| for |psi| = 1
  double shift = 0.0;  ///< must lie below the lowest eigenvalue; lowered if not
  int extra = 3;       ///< guard vectors in the iterated block
  int max_iterations = 300;
  std::uint64_t seed = 12345;
};

struct Eigenpairs {
  Eigen::VectorXd values;   ///< ascending
  Eigen::MatrixXcd vectors; ///< unit columns
  Eigen::VectorXd residuals;
  int iterations = 0;
  double shift = 0.0;
};

/// k lowest eigenpairs by shift-invert block iteration with Rayleigh-Ritz.
/// Throws NonConvergence with the residuals reached.
Eigenpairs lowest_eigs(const SparseOperator &H, const EigenOptions &opts);

struct GridSolve {
  GridSpec grid;
  double lambda1 = 0, lambda2 = 0, lambda3 = 0;
  double gap = 0;
  double residual = 0; ///< largest of the three eigenpair residuals
  int iterations = 0;
};

struct GapMeasurement {
  std::vector<GridSolve> solves; ///< coarse to fine
  double lambda1 = 0, lambda2 = 0, lambda3 = 0; ///< finest grid
  double gap = 0;                               ///< finest grid
  double residual = 0;
  GridSpec grid;
  double extrapolated_lambda1 = 0;
  double extrapolated_gap = 0;
  double error_estimate = 0;
  bool reliable = true; ///< false if a residual exceeds 10% of the gap
};

struct GapOptions {
  WellSet wells = WellSet::both;
  double tol = 1e-9;
  double shift = 0.0;                  ///< energy guess; shift = guess - 0.02 h
  std::optional<double> predicted_gap; ///< gates the run and tightens tol
  bool check_gap = true;               ///< throw UnresolvableGap for tiny gaps
};

/// Eigenvalues on every grid of the ladder plus order-4 Richardson
/// extrapolation of lambda1 and of the gap.
GapMeasurement measure_gap(const PotentialSpec &spec, double h, const std::vector<GridSpec> &grids,
                           const GapOptions &opts);

/// lambda_fine + (lambda_fine - lambda_coarse) / (2^order - 1).
double richardson(double coarse, double fine, int order);

} // namespace magtunnel
