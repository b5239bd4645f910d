#include <doctest.h>

#include <cmath>

#include "common.hpp"
#include "magtunnel/errors.hpp"
#include "magtunnel/potential.hpp"

using namespace magtunnel;
using magtunnel::testing::canonical_spec;

TEST_CASE("bump profile: value at the centre, support and smooth edge") {
  const PotentialSpec spec = canonical_spec();
  CHECK(eval_single_well(0.0, spec) == doctest::Approx(-1.0));
  CHECK(eval_single_well(1.0, spec) == 0.0);
  CHECK(eval_single_well(1.5, spec) == 0.0);
  // Flat to all orders at r = a: values collapse faster than any power.
  CHECK(std::abs(eval_single_well(0.99, spec)) < 1e-20);
  CHECK(eval_single_well(0.5, spec) == doctest::Approx(-std::exp(1.0 - 1.0 / 0.75)));
}

TEST_CASE("bump profile: excess is accurate near the minimum") {
  const PotentialSpec spec = canonical_spec();
  // v - v0 ~ -v0 r^2 / a^2 for small r; the direct difference would lose digits.
  const double r = 1e-6;
  CHECK(spec.profile->excess(r) == doctest::Approx(r * r).epsilon(1e-9));
}

TEST_CASE("bump profile: derivatives against finite differences") {
  const PotentialSpec spec = canonical_spec();
  for (double r : {0.1, 0.4, 0.7, 0.9}) {
    const double d = 1e-5;
    const double fd = (eval_single_well(r + d, spec) - eval_single_well(r - d, spec)) / (2 * d);
    CHECK(spec.profile->derivative(r) == doctest::Approx(fd).epsilon(1e-8));
  }
  const double d = 1e-4;
  const double fd2 = (eval_single_well(d, spec) - 2 * eval_single_well(0.0, spec) + eval_single_well(-d, spec)) / (d * d);
  CHECK(spec.vpp0 == doctest::Approx(2.0));
  CHECK(fd2 == doctest::Approx(spec.vpp0).epsilon(1e-6));
}

TEST_CASE("effective potential adds the magnetic term") {
  const PotentialSpec spec = canonical_spec();
  CHECK(eval_effective(2.0, spec) == doctest::Approx(1.0));
  CHECK(eval_effective(0.5, spec) == doctest::Approx(0.0625 + eval_single_well(0.5, spec)));
  CHECK(eval_effective_derivative(3.0, spec) == doctest::Approx(1.5));
}

TEST_CASE("double well: mirror symmetry and disjoint supports") {
  const PotentialSpec spec = canonical_spec();
  for (double x : {0.3, 1.4, 2.2, 2.9})
    for (double y : {-0.5, 0.0, 0.3})
      CHECK(eval_double_well(x, y, spec) == eval_double_well(-x, y, spec));
  CHECK(eval_double_well(2.0, 0.0, spec) == doctest::Approx(-1.0));
  CHECK(eval_double_well(0.0, 0.0, spec) == 0.0);
  CHECK(eval_double_well(2.0, 1.0, spec) == 0.0);
  CHECK(eval_double_well(3.5, 0.0, spec) == 0.0);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(PotentialSpec::make(1.0, 0.9, 1.0, -1.0), InvariantViolation);
  CHECK_THROWS_AS(PotentialSpec::make(0.0, 2.0, 1.0, -1.0), InvariantViolation);
  CHECK_THROWS_AS(PotentialSpec::make(1.0, 2.0, 1.0, 0.5), InvariantViolation);
  CHECK_THROWS_AS(PotentialSpec::make(1.0, 2.0, 1.0, -1.0, "square"), InvariantViolation);
  const PotentialSpec free = PotentialSpec::free_field(1.0, 2.0);
  CHECK_FALSE(free.has_well());
  CHECK(eval_double_well(2.0, 0.0, free) == 0.0);
  CHECK(canonical_spec().harmonic_frequency() == doctest::Approx(std::sqrt(5.0)));
}
