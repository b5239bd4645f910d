#include "magtunnel/planar_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/SparseCholesky>

#include "magtunnel/errors.hpp"

namespace magtunnel {

namespace {

struct Stencil {
  int width;                 // offsets -width..width
  std::array<double, 5> c;   // second-difference weights, unscaled
  double denominator;
};

Stencil second_difference(int order) {
  if (order == 2)
    return {1, {0.0, 1.0, -2.0, 1.0, 0.0}, 1.0};
  if (order == 4)
    return {2, {-1.0, 16.0, -30.0, 16.0, -1.0}, 12.0};
  throw DomainError("discretization order must be 2 or 4, got " + std::to_string(order));
}

double well_potential(double x, double y, const PotentialSpec &spec, WellSet wells) {
  switch (wells) {
  case WellSet::both:
    return eval_double_well(x, y, spec);
  case WellSet::right:
    return eval_single_well(std::hypot(x - spec.L, y), spec);
  case WellSet::none:
    break;
  }
  return 0.0;
}

Eigen::MatrixXcd orthonormal_columns(const Eigen::MatrixXcd &M) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(M);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(M.rows(), M.cols());
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

} // namespace

double max_planar_spacing(const PotentialSpec &spec, double h) {
  const double magnetic = std::sqrt(h / spec.B) / 6.0;
  const double phase = spec.L > 0 ? h / (spec.B * spec.L) * std::numbers::pi / 4.0 : magnetic;
  return std::min(magnetic, phase);
}

double min_half_width_x(const PotentialSpec &spec, double h) {
  return spec.L + spec.a + 5.0 * std::sqrt(h / spec.B);
}

double min_half_width_y(const PotentialSpec &spec, double h) {
  return spec.a + 5.0 * std::sqrt(h / spec.B);
}

void check_grid(const GridSpec &grid, const PotentialSpec &spec, double h) {
  if (grid.nx < 5 || grid.ny < 5)
    throw GridTooCoarse("planar grid needs at least 5 nodes per direction");
  const double limit = max_planar_spacing(spec, h) * (1.0 + 1e-12);
  if (grid.spacing_x() > limit || grid.spacing_y() > limit) {
    std::ostringstream msg;
    msg << "planar spacing (" << grid.spacing_x() << ", " << grid.spacing_y()
        << ") exceeds the limit " << max_planar_spacing(spec, h);
    throw GridTooCoarse(msg.str());
  }
  if (grid.half_width_x < min_half_width_x(spec, h) * (1.0 - 1e-12) ||
      grid.half_width_y < min_half_width_y(spec, h) * (1.0 - 1e-12))
    throw GridTooCoarse("planar box is smaller than five magnetic lengths beyond the wells");
}

std::vector<GridSpec> default_ladder(const PotentialSpec &spec, double h, int levels, int order) {
  if (levels < 1)
    throw DomainError("a grid ladder needs at least one level");
  const double limit = max_planar_spacing(spec, h);
  const double X = min_half_width_x(spec, h), Y = min_half_width_y(spec, h);
  const int cells = static_cast<int>(std::ceil(2.0 * X / limit - 1e-9));
  std::vector<int> nx;
  for (int l = 0; l < levels; ++l)
    nx.push_back((cells << l) - 1);
  (void)Y;
  return ladder_from_nx(spec, h, nx, order);
}

std::vector<GridSpec> ladder_from_nx(const PotentialSpec &spec, double h,
                                     const std::vector<int> &nx_values, int order) {
  if (nx_values.empty())
    throw DomainError("empty grid ladder");
  const double X = min_half_width_x(spec, h);
  const double Y0 = min_half_width_y(spec, h);
  const int cells_x0 = nx_values.front() + 1;
  const double dx0 = 2.0 * X / cells_x0;
  const int cells_y0 = static_cast<int>(std::ceil(2.0 * Y0 / dx0 - 1e-9));
  const double Y = 0.5 * cells_y0 * dx0;

  std::vector<GridSpec> out;
  for (std::size_t l = 0; l < nx_values.size(); ++l) {
    const int cells_x = nx_values[l] + 1;
    if (cells_x % cells_x0 != 0)
      throw DomainError("grid ladder: nx + 1 must be a multiple of the coarsest nx + 1");
    const int factor = cells_x / cells_x0;
    out.push_back(GridSpec{X, Y, cells_x - 1, cells_y0 * factor - 1, order});
  }
  for (std::size_t l = 1; l < out.size(); ++l)
    if (out[l].nx + 1 != 2 * (out[l - 1].nx + 1))
      throw DomainError("grid ladder: spacing must halve between levels");
  return out;
}

SparseOperator build_hamiltonian(const PotentialSpec &spec, double h, const GridSpec &grid,
                                 WellSet wells) {
  check_grid(grid, spec, h);
  const Stencil st = second_difference(grid.order);
  const double dx = grid.spacing_x(), dy = grid.spacing_y();
  const double kx = -h * h / (st.denominator * dx * dx);
  const double ky = -h * h / (st.denominator * dy * dy);

  std::vector<Eigen::Triplet<Complex>> entries;
  entries.reserve(static_cast<std::size_t>(grid.size()) * (4 * st.width + 1));
  for (int i = 0; i < grid.nx; ++i) {
    const double x = grid.x(i);
    // Peierls phase per y step: psi_{j+m} enters with exp(-i m B x dy / h).
    const double theta = spec.B * x * dy / h;
    for (int j = 0; j < grid.ny; ++j) {
      const Eigen::Index row = grid.index(i, j);
      double diag = (kx + ky) * st.c[2] + well_potential(x, grid.y(j), spec, wells);
      // The wide stencil reaches one node past the wall next to it; the wall
      // is a node of odd symmetry, so that ghost carries -psi (of the
      // gauge-rotated function in y, which leaves a real coefficient).
      if (st.width == 2) {
        if (i == 0 || i == grid.nx - 1)
          diag -= kx * st.c[0];
        if (j == 0 || j == grid.ny - 1)
          diag -= ky * st.c[0];
      }
      entries.emplace_back(row, row, Complex(diag, 0.0));
      for (int m = -st.width; m <= st.width; ++m) {
        if (m == 0)
          continue;
        const double w = st.c[static_cast<std::size_t>(m + 2)];
        if (i + m >= 0 && i + m < grid.nx)
          entries.emplace_back(row, grid.index(i + m, j), Complex(kx * w, 0.0));
        if (j + m >= 0 && j + m < grid.ny)
          entries.emplace_back(row, grid.index(i, j + m), ky * w * std::polar(1.0, -m * theta));
      }
    }
  }
  SparseOperator H(grid.size(), grid.size());
  H.setFromTriplets(entries.begin(), entries.end());
  H.makeCompressed();
  return H;
}

double hermiticity_defect(const SparseOperator &H, int pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto random_vector = [&] {
    Eigen::VectorXcd v(H.rows());
    for (auto &c : v)
      c = Complex(normal(rng), normal(rng));
    return v;
  };
  double norm = 0.0;
  for (int k = 0; k < H.outerSize(); ++k) {
    double col = 0.0;
    for (SparseOperator::InnerIterator it(H, k); it; ++it)
      col += std::abs(it.value());
    norm = std::max(norm, col);
  }
  double worst = 0.0;
  for (int p = 0; p < pairs; ++p) {
    const Eigen::VectorXcd u = random_vector(), v = random_vector();
    const Eigen::VectorXcd Hu = H * u, Hv = H * v;
    const Complex lhs = u.dot(Hv);
    const Complex rhs = std::conj(v.dot(Hu));
    worst = std::max(worst, std::abs(lhs - rhs) / (norm * u.norm() * v.norm()));
  }
  return worst;
}

SparseOperator gauge_transform(const SparseOperator &H, const PotentialSpec &spec, double h,
                               const GridSpec &grid) {
  Eigen::VectorXcd phase(grid.size());
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j)
      phase(grid.index(i, j)) = std::polar(1.0, 0.5 * spec.B * grid.x(i) * grid.y(j) / h);
  SparseOperator out = H;
  for (int k = 0; k < out.outerSize(); ++k)
    for (SparseOperator::InnerIterator it(out, k); it; ++it)
      it.valueRef() *= phase(it.row()) * std::conj(phase(it.col()));
  return out;
}

Eigen::VectorXcd magnetic_reflection(const Eigen::VectorXcd &psi, const GridSpec &grid) {
  Eigen::VectorXcd out(psi.size());
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j)
      out(grid.index(i, j)) = std::conj(psi(grid.index(grid.nx - 1 - i, j)));
  return out;
}

Eigenpairs lowest_eigs(const SparseOperator &H, const EigenOptions &opts) {
  if (opts.k < 1 || opts.extra < 0)
    throw DomainError("lowest_eigs needs k >= 1");
  const Eigen::Index n = H.rows();
  const Eigen::Index p = std::min<Eigen::Index>(opts.k + opts.extra, n);
  if (p < opts.k)
    throw DomainError("operator is smaller than the requested eigenvalue count");

  SparseOperator identity(n, n);
  identity.setIdentity();
  Eigen::SimplicialLDLT<SparseOperator, Eigen::Lower> solver;
  // Factorizes H - shift so that exactly `below` eigenvalues lie under the
  // shift (LDL^T inertia), moving the shift down towards `floor` if needed.
  auto factorize = [&](double shift, Eigen::Index below, double floor) {
    double step = below == 0 ? 0.1 * std::max(std::abs(shift), 1e-2) : 0.5 * (shift - floor);
    for (int attempt = 0; attempt <= 40; ++attempt) {
      solver.compute(H - Complex(shift, 0.0) * identity);
      if (solver.info() != Eigen::Success)
        throw NonConvergence("factorization of H - shift failed at shift " + std::to_string(shift));
      const Eigen::Index negative = (solver.vectorD().real().array() < 0.0).count();
      if (negative == below)
        return shift;
      if (negative < below)
        throw NonConvergence("inertia of H - shift contradicts the converged eigenvalues");
      if (below == 0) {
        shift -= step;
        step *= 2.0;
      } else {
        shift -= step;
        step *= 0.5;
      }
    }
    throw NonConvergence("could not place the shift below the wanted eigenvalues");
  };

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXcd V(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      V(i, j) = Complex(normal(rng), normal(rng));
  V = orthonormal_columns(V);

  // Converged pairs are locked and projected out; the shift then moves up
  // under the next wanted eigenvalue, so a dense spectrum above the lowest
  // pair does not stall the iteration.
  Eigen::MatrixXcd locked(n, 0);
  std::vector<double> locked_values, locked_residuals;
  double shift = factorize(opts.shift, 0, 0.0);
  const double first_shift = shift;
  Eigen::VectorXd residuals;
  int shifts = 0;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const Eigen::Index wanted = opts.k - static_cast<Eigen::Index>(locked_values.size());
    const Eigen::Index block = V.cols();
    Eigen::MatrixXcd W(n, block);
    for (Eigen::Index j = 0; j < block; ++j)
      W.col(j) = solver.solve(V.col(j));
    for (int pass = 0; pass < 2 && locked.cols() > 0; ++pass)
      W -= locked * (locked.adjoint() * W);
    W = orthonormal_columns(W);
    const Eigen::MatrixXcd HW = H * W;
    Eigen::MatrixXcd projected = W.adjoint() * HW;
    projected = 0.5 * (projected + projected.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ritz(projected);
    V = W * ritz.eigenvectors();
    const Eigen::MatrixXcd HV = HW * ritz.eigenvectors();
    residuals.resize(block);
    for (Eigen::Index j = 0; j < block; ++j)
      residuals(j) = (HV.col(j) - ritz.eigenvalues()(j) * V.col(j)).norm();

    Eigen::Index converged = 0;
    while (converged < wanted && residuals(converged) <= opts.tol)
      ++converged;
    if (converged == wanted) {
      for (Eigen::Index j = 0; j < converged; ++j) {
        locked_values.push_back(ritz.eigenvalues()(j));
        locked_residuals.push_back(residuals(j));
      }
      Eigenpairs out;
      out.values = Eigen::Map<Eigen::VectorXd>(locked_values.data(), opts.k);
      out.residuals = Eigen::Map<Eigen::VectorXd>(locked_residuals.data(), opts.k);
      out.vectors.resize(n, opts.k);
      out.vectors << locked, V.leftCols(converged);
      // Rayleigh-Ritz across stages leaves the order intact, but sort anyway.
      std::vector<int> order(opts.k);
      for (int j = 0; j < opts.k; ++j)
        order[j] = j;
      std::sort(order.begin(), order.end(),
                [&](int a, int b) { return out.values(a) < out.values(b); });
      Eigenpairs sorted = out;
      for (int j = 0; j < opts.k; ++j) {
        sorted.values(j) = out.values(order[j]);
        sorted.residuals(j) = out.residuals(order[j]);
        sorted.vectors.col(j) = out.vectors.col(order[j]);
      }
      sorted.iterations = it;
      sorted.shift = first_shift;
      return sorted;
    }
    if (converged > 0 && shifts < 4) {
      Eigen::MatrixXcd grown(n, locked.cols() + converged);
      grown << locked, V.leftCols(converged);
      locked = grown;
      for (Eigen::Index j = 0; j < converged; ++j) {
        locked_values.push_back(ritz.eigenvalues()(j));
        locked_residuals.push_back(residuals(j));
      }
      const double top = locked_values.back();
      const double next = ritz.eigenvalues()(converged);
      // Inside a near-degenerate cluster there is no room for a new shift;
      // the locked vectors are still deflated under the old one.
      if (next - top > 100.0 * opts.tol + 1e-8 * std::abs(next)) {
        try {
          shift = factorize(next - 0.05 * (next - top), static_cast<Eigen::Index>(locked.cols()), top);
        } catch (const NonConvergence &) {
          shift = factorize(shift, static_cast<Eigen::Index>(locked.cols()) - converged, 0.0);
        }
      }
      const Eigen::MatrixXcd rest = V.rightCols(block - converged);
      V = orthonormal_columns(rest);
      ++shifts;
    }
  }
  std::ostringstream msg;
  msg << "shift-invert iteration did not reach residual " << opts.tol << " in "
      << opts.max_iterations << " iterations; residuals of the unconverged block:";
  for (Eigen::Index j = 0; j < residuals.size(); ++j)
    msg << ' ' << residuals(j);
  throw NonConvergence(msg.str());
}

double richardson(double coarse, double fine, int order) {
  return fine + (fine - coarse) / (std::pow(2.0, order) - 1.0);
}

GapMeasurement measure_gap(const PotentialSpec &spec, double h, const std::vector<GridSpec> &grids,
                           const GapOptions &opts) {
  if (grids.size() < 3)
    throw DomainError("measure_gap needs a ladder of at least 3 grids");
  for (std::size_t l = 1; l < grids.size(); ++l) {
    const GridSpec &c = grids[l - 1], &f = grids[l];
    if (!close(c.half_width_x, f.half_width_x) || !close(c.half_width_y, f.half_width_y) ||
        !close(c.spacing_x(), 2.0 * f.spacing_x()) || !close(c.spacing_y(), 2.0 * f.spacing_y()) ||
        c.order != f.order)
      throw DomainError("measure_gap: grids must share the box and halve the spacing");
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double floor_scale = 1e3 * eps * std::max(std::abs(opts.shift), h);
  double tol = opts.tol;
  if (opts.predicted_gap) {
    if (opts.check_gap && *opts.predicted_gap < floor_scale) {
      std::ostringstream msg;
      msg << "predicted gap " << *opts.predicted_gap << " is below 1e3 eps |lambda1| = " << floor_scale;
      throw UnresolvableGap(msg.str());
    }
    tol = std::min(tol, 1e-3 * *opts.predicted_gap);
  }

  GapMeasurement out;
  double guess = opts.shift;
  for (const GridSpec &grid : grids) {
    const SparseOperator H = build_hamiltonian(spec, h, grid, opts.wells);
    EigenOptions eo;
    eo.k = 3;
    eo.tol = tol;
    eo.shift = guess - 0.02 * h;
    const Eigenpairs eig = lowest_eigs(H, eo);
    GridSolve s;
    s.grid = grid;
    s.lambda1 = eig.values(0);
    s.lambda2 = eig.values(1);
    s.lambda3 = eig.values(2);
    s.gap = s.lambda2 - s.lambda1;
    s.residual = eig.residuals.maxCoeff();
    s.iterations = eig.iterations;
    out.solves.push_back(s);
    guess = s.lambda1;
    if (s.residual > 0.1 * s.gap)
      out.reliable = false;
  }
  const GridSolve &fine = out.solves.back();
  if (opts.check_gap && fine.gap < 1e3 * eps * std::abs(fine.lambda1)) {
    std::ostringstream msg;
    msg << "measured gap " << fine.gap << " is below 1e3 eps |lambda1|";
    throw UnresolvableGap(msg.str());
  }
  const std::size_t m = out.solves.size();
  const GridSolve &mid = out.solves[m - 2], &coarse = out.solves[m - 3];
  const int order = fine.grid.order;
  out.lambda1 = fine.lambda1;
  out.lambda2 = fine.lambda2;
  out.lambda3 = fine.lambda3;
  out.gap = fine.gap;
  out.residual = fine.residual;
  out.grid = fine.grid;
  out.extrapolated_lambda1 = richardson(mid.lambda1, fine.lambda1, order);
  out.extrapolated_gap = richardson(mid.gap, fine.gap, order);
  out.error_estimate = std::abs(out.extrapolated_gap - richardson(coarse.gap, mid.gap, order));
  return out;
}

} // namespace magtunnel
