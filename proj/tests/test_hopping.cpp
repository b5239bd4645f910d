#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "common.hpp"
#include "magtunnel/agmon.hpp"
#include "magtunnel/errors.hpp"
#include "magtunnel/hopping.hpp"

using namespace magtunnel;
using magtunnel::testing::canonical_spec;

namespace {

struct Fixture {
  PotentialSpec spec = canonical_spec();
  double h = 0.2;
  RadialState state = solve_radial(spec, h);
  TailModel model = match_normalization(state, spec, h);
};

// |1 - b/a| for log-complex a, b.
double relative_difference(const LogComplex &a, const LogComplex &b) {
  return std::abs(1.0 - (b / a).value());
}

} // namespace

TEST_CASE("saddle point of the double integral") {
  const PotentialSpec spec = canonical_spec();
  const SaddleInfo sd = saddle(spec);
  CHECK(sd.N == doctest::Approx(0.25));
  CHECK(sd.t_star == doctest::Approx(0.3090169944).epsilon(1e-10));
  CHECK(sd.g_star == doctest::Approx(5.915771430178389).epsilon(1e-13));
  CHECK(sd.gradient_residual < 1e-13);
  CHECK(saddle_phase(sd.t_star, sd.t_star, spec) == doctest::Approx(sd.g_star).epsilon(1e-14));

  // Hessian determinant against finite differences of the phase.
  const double t = sd.t_star, d = 1e-4;
  auto g = [&](double a, double b) { return saddle_phase(a, b, spec); };
  const double gtt = (g(t + d, t) - 2 * g(t, t) + g(t - d, t)) / (d * d);
  const double gts = (g(t + d, t + d) - g(t + d, t - d) - g(t - d, t + d) + g(t - d, t - d)) / (4 * d * d);
  CHECK(sd.hess_det == doctest::Approx(gtt * gtt - gts * gts).epsilon(1e-6));
}

TEST_CASE("hopping weight vanishes at the origin of the quadrant") {
  CHECK(hopping_weight(0.0, 0.0) == 0.0);
  CHECK(hopping_weight(0.5, 0.5) == doctest::Approx(std::sqrt(2.0) - std::pow(2.0, -1.5)));
}

TEST_CASE("line and reduced integrals agree") {
  Fixture f;
  const LogComplex line = hopping_line_integral(f.model, f.spec, f.h);
  const LogScalar reduced = hopping_reduced_integral(f.model, f.spec, f.h);
  const LogScalar full = hopping_reduced_integral(f.model, f.spec, f.h, false);
  CHECK(reduced.sign() < 0);
  CHECK(std::abs(ratio(line.modulus(), reduced.abs()) - 1.0) < 1e-9);
  CHECK(std::abs(ratio(full, reduced) - 1.0) < 1e-10);
  // Real and negative: phase pi.
  CHECK(std::abs(std::abs(line.phase()) - std::numbers::pi) < 1e-10);
  const double C = f.model.C_h_matched.value();
  CHECK(reduced.value() / (C * C) == doctest::Approx(-1.0941e-12).epsilon(1e-3));
}

TEST_CASE("Laplace form approaches the reduced integral") {
  const PotentialSpec spec = canonical_spec();
  double previous = 1e300;
  for (double h : {0.2, 0.1}) {
    const RadialState st = solve_radial(spec, h);
    const TailModel m = match_normalization(st, spec, h);
    const HoppingReport rep = compute_hopping(m, spec, h, false);
    const double dev = std::abs(ratio(rep.w_laplace, rep.w_reduced) - 1.0);
    CHECK(dev < previous);
    previous = dev;
  }
}

TEST_CASE("tunnelling constant reproduces the asymptotic hopping form") {
  Fixture f;
  const LogScalar asym = hopping_asymptotic(f.model, f.spec, f.h, f.model.C_h_asymptotic);
  const double C = tunneling_constant(f.spec);
  const double log_expected = std::log(C) + 0.5 * std::log(f.h) - action_S(f.spec) / f.h;
  CHECK(asym.log_mag() == doctest::Approx(log_expected).epsilon(1e-12));
}

TEST_CASE("gap prediction and error gate") {
  Fixture f;
  const HoppingReport rep = compute_hopping(f.model, f.spec, f.h, false);
  const GapPrediction g = gap_prediction(rep, f.state.mu_h);
  CHECK(g.gap.value() == doctest::Approx(2.0 * std::abs(rep.w_reduced.value())));
  CHECK(g.lambda2 - g.lambda1 == doctest::Approx(g.gap.value()).epsilon(1e-4));
  const double log_rho = -3.0 * std::log(f.h) - 2.0 * rep.d_0_2Lma / f.h - rep.w_reduced.log_mag();
  CHECK(std::log(g.rho) == doctest::Approx(log_rho));
  CHECK(g.reliable);
}

TEST_CASE("translated states: equal moduli on the mid-line") {
  Fixture f;
  for (double y : {-2.0, -0.5, 0.0, 0.7, 3.0}) {
    const LogComplex l = translated_state(Side::left, 0.0, y, f.model, f.spec, f.h);
    const LogComplex r = translated_state(Side::right, 0.0, y, f.model, f.spec, f.h);
    CHECK(l.log_mag() == doctest::Approx(r.log_mag()).epsilon(1e-14));
  }
}

TEST_CASE("magnetic translation maps the right state onto the left one") {
  // phi_l(x, y) = exp(-2 i B L y / h) phi_r(x + 2L, y).
  Fixture f;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(-f.spec.L - 3.0, -f.spec.L + 3.0), uy(-3.0, 3.0);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double x = ux(rng), y = uy(rng);
    const LogComplex l = translated_state(Side::left, x, y, f.model, f.spec, f.h, &f.state);
    const LogComplex r = translated_state(Side::right, x + 2.0 * f.spec.L, y, f.model, f.spec, f.h, &f.state);
    const LogComplex phase(0.0, -2.0 * f.spec.B * f.spec.L * y / f.h);
    worst = std::max(worst, relative_difference(l, phase * r));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("translated state needs the interior solution inside the support") {
  Fixture f;
  CHECK_THROWS_AS(translated_state(Side::right, 2.0, 0.0, f.model, f.spec, f.h), DomainError);
}
