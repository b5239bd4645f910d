#include <doctest.h>

#include <cmath>
#include <complex>

#include "common.hpp"
#include "magtunnel/errors.hpp"
#include "magtunnel/kummer_tail.hpp"

using namespace magtunnel;
using magtunnel::testing::canonical_spec;

namespace {

struct Fixture {
  PotentialSpec spec = canonical_spec();
  double h = 0.2;
  RadialState state = solve_radial(spec, h);
  TailModel model = match_normalization(state, spec, h);
};

} // namespace

TEST_CASE("tail integrals: closed form at alpha = 1") {
  // alpha = 1: int_0^inf exp(-c(1+2t)) (1+t)^{-1} dt = e^{c} E1(2c).
  const double B = 1.0, h = 0.5, x = 2.0;
  const double c = B * x / (4.0 * h);
  const TailIntegrals I = tail_integrals({x, 0.0}, 1.0, B, h);
  const double value = std::exp(I.log_scale) * I.plain.real();
  // E1(y) = -Ei(-y)
  const double expected = std::exp(c) * -std::expint(-2.0 * c);
  CHECK(value == doctest::Approx(expected).epsilon(1e-11));
}

TEST_CASE("tail integrals are conjugation-symmetric in z") {
  const std::complex<double> z(3.0, 0.7);
  const TailIntegrals a = tail_integrals(z, 1.7, 1.0, 0.2);
  const TailIntegrals b = tail_integrals(std::conj(z), 1.7, 1.0, 0.2);
  CHECK(a.log_scale == doctest::Approx(b.log_scale));
  CHECK(std::abs(a.plain - std::conj(b.plain)) < 1e-13 * std::abs(a.plain));
  CHECK(std::abs(a.weighted - std::conj(b.weighted)) < 1e-13 * std::abs(a.weighted));
}

TEST_CASE("matched tail continues the radial ground state") {
  Fixture f;
  CHECK(f.model.alpha == doctest::Approx(0.5 - f.state.mu_h / (2.0 * f.spec.B * f.h)));
  CHECK(f.model.match_radius > f.spec.a);
  CHECK(f.model.match_residual < 1e-6);
  double worst = 0.0;
  for (double r = 1.02; r <= 2.0 * f.spec.L; r += 0.02)
    worst = std::max(worst, std::abs(tail_value(r, f.model, f.spec, f.h).value() / f.state.value_at(r) - 1.0));
  CHECK(worst < 1e-5);
}

TEST_CASE("tail satisfies the radial equation outside the support") {
  Fixture f;
  for (double r : {1.5, 2.0, 3.0})
    CHECK(tail_ode_residual(r, f.model, f.spec, f.h) < 1e-8);
}

TEST_CASE("tail derivative matches finite differences") {
  Fixture f;
  for (double r : {1.3, 2.0, 3.5}) {
    const double d = 1e-5 * r;
    const double fd = (tail_value(r + d, f.model, f.spec, f.h).value() -
                       tail_value(r - d, f.model, f.spec, f.h).value()) / (2.0 * d);
    CHECK(tail_derivative(r, f.model, f.spec, f.h).value() == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("matched normalisation is linear in the state") {
  Fixture f;
  RadialState doubled = f.state;
  doubled.u *= 2.0;
  const TailModel m2 = match_normalization(doubled, f.spec, f.h);
  CHECK(ratio(m2.C_h_matched, f.model.C_h_matched) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("matched and asymptotic normalisations converge") {
  const PotentialSpec spec = canonical_spec();
  const TailModel a = match_normalization(solve_radial(spec, 0.2), spec, 0.2);
  const TailModel b = match_normalization(solve_radial(spec, 0.1), spec, 0.1);
  const double ra = ratio(a.C_h_matched, a.C_h_asymptotic);
  const double rb = ratio(b.C_h_matched, b.C_h_asymptotic);
  CHECK(std::abs(rb - 1.0) < std::abs(ra - 1.0));
  CHECK(std::abs(rb - 1.0) < 0.1);
}

TEST_CASE("Laplace internals") {
  const PotentialSpec spec = canonical_spec();
  const LaplaceInternals lap = laplace_internals(spec);
  CHECK(lap.t_L == doctest::Approx(0.5 * (std::sqrt(2.0) - 1.0)));
  CHECK(lap.fprime_residual < 1e-12);
  CHECK(lap.fpp_tL == doctest::Approx(lap.fpp_tL_direct).epsilon(1e-12));
  CHECK(lap.fpp_tL == doctest::Approx(8.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(lap.nu == doctest::Approx(0.5 - std::sqrt(5.0) / 2.0));
  const double d = 1e-5;
  const double fd = (laplace_phase(lap.t_L + d, spec) - laplace_phase(lap.t_L - d, spec)) / (2 * d);
  CHECK(std::abs(fd) < 1e-8);
}

TEST_CASE("tail rejects points inside the support") {
  Fixture f;
  CHECK_THROWS_AS(tail_value(0.5, f.model, f.spec, f.h), DomainError);
  CHECK_THROWS_AS(tail_derivative(1.0, f.model, f.spec, f.h), DomainError);
}
