#include <doctest.h>

#include <cmath>
#include <numbers>

#include "common.hpp"
#include "magtunnel/errors.hpp"
#include "magtunnel/radial_solver.hpp"

using namespace magtunnel;
using magtunnel::testing::canonical_spec;

TEST_CASE("free field reproduces the Landau levels") {
  const PotentialSpec free = PotentialSpec::free_field(1.0, 2.0);
  const RadialState st = solve_radial(free, 0.1);
  CHECK(std::abs(st.mu_h - 0.1) < 1e-6);
  CHECK(std::abs(st.mu_h1 - 0.3) < 1e-6);
}

TEST_CASE("canonical ground state: normalised, positive, accurate") {
  const PotentialSpec spec = canonical_spec();
  const RadialState st = solve_radial(spec, 0.2);
  CHECK(st.mu_h == doctest::Approx(-0.5275127088).epsilon(1e-9));
  CHECK(st.norm_2d == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((st.u.array() > 0.0).all());
  CHECK(st.residual < 1e-8);
  CHECK(st.richardson_shift < 1e-8);
  CHECK(st.mu_h < st.mu_h1);
}

TEST_CASE("ground energy approaches the harmonic level from above") {
  const PotentialSpec spec = canonical_spec();
  double previous = 1e300;
  for (double h : {0.2, 0.1, 0.05}) {
    const RadialState st = solve_radial(spec, h);
    CHECK(st.mu_h < 0.0);
    // The bump lies above its osculating parabola, so the harmonic level is a lower bound.
    const double excess = (st.mu_h - spec.v0) / h - spec.harmonic_frequency();
    CHECK(excess > 0.0);
    CHECK(excess < previous);
    previous = excess;
  }
}

TEST_CASE("first excited m = 0 level is bound only for small h") {
  const PotentialSpec spec = canonical_spec();
  CHECK(solve_radial(spec, 0.2).mu_h1 > 0.0);
  CHECK(solve_radial(spec, 0.1).mu_h1 < 0.0);
  CHECK(solve_radial(spec, 0.05).mu_h1 < 0.0);
}

TEST_CASE("ground-state amplitude at the origin approaches K(0) h^{-1/2}") {
  const PotentialSpec spec = canonical_spec();
  const double k0 = wkb_prefactor_origin(spec);
  CHECK(k0 == doctest::Approx(std::sqrt(std::sqrt(5.0) / (2.0 * std::numbers::pi))));
  CHECK(k0 == doctest::Approx(0.596558).epsilon(1e-6));
  double previous = 1e300;
  for (double h : {0.1, 0.05, 0.025}) {
    const RadialState st = solve_radial(spec, h);
    const double deviation = std::abs(st.u(0) * std::sqrt(h) / k0 - 1.0);
    CHECK(deviation < previous);
    previous = deviation;
  }
  CHECK(previous < 0.02);
}

TEST_CASE("WKB prefactor is continuous at the origin and decreasing") {
  const PotentialSpec spec = canonical_spec();
  CHECK(wkb_prefactor(1e-7, spec) == doctest::Approx(wkb_prefactor_origin(spec)).epsilon(1e-6));
  CHECK(std::isfinite(wkb_log_integrand(1e-8, spec)));
  CHECK(wkb_prefactor(1.0, spec) < wkb_prefactor(0.5, spec));
}

TEST_CASE("interpolation and log derivative are consistent with the grid") {
  const PotentialSpec spec = canonical_spec();
  const RadialState st = solve_radial(spec, 0.2);
  const Eigen::Index i = st.node_at_or_above(1.3);
  CHECK(st.r(i) >= 1.3);
  CHECK(st.value_at(st.r(i)) == doctest::Approx(st.u(i)).epsilon(1e-12));
  const double d = st.spacing;
  const double fd = (std::log(st.u(i + 1)) - std::log(st.u(i - 1))) / (2 * d);
  CHECK(st.log_derivative_at_node(i) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("radial grid errors") {
  const PotentialSpec spec = canonical_spec();
  RadialGridParams coarse;
  coarse.spacing = 0.1;
  CHECK_THROWS_AS(solve_radial(spec, 0.2, coarse), GridTooCoarse);
  RadialGridParams short_box;
  short_box.r_max = 3.0;
  CHECK_THROWS_AS(solve_radial(spec, 0.2, short_box), DomainError);
}
