#include <doctest.h>

#include <cmath>

#include "common.hpp"
#include "magtunnel/agmon.hpp"
#include "magtunnel/hopping.hpp"
#include "magtunnel/kummer_tail.hpp"

using namespace magtunnel;
using magtunnel::testing::canonical_spec;

TEST_CASE("canonical distances") {
  const PotentialSpec spec = canonical_spec();
  CHECK(agmon_distance(0.0, 2.0, spec) == doctest::Approx(1.85158776).epsilon(1e-8));
  CHECK(agmon_distance(0.0, 4.0, spec) == doctest::Approx(5.47177204).epsilon(1e-8));
  CHECK(agmon_distance(0.0, 3.0, spec) == doctest::Approx(3.45492729).epsilon(1e-8));
  CHECK(free_distance(4.0, spec) == doctest::Approx(5.915771430178389).epsilon(1e-13));
  CHECK(action_S(spec) == doctest::Approx(5.027772658093022).epsilon(1e-12));
}

TEST_CASE("distance is additive and free distance matches its quadrature") {
  const PotentialSpec spec = canonical_spec();
  const double whole = agmon_distance(0.0, 3.0, spec);
  const double split = agmon_distance(0.0, 0.7, spec) + agmon_distance(0.7, 3.0, spec);
  CHECK(std::abs(whole - split) < 1e-12);
  for (double r : {0.5, 2.0, 4.0, 7.0})
    CHECK(std::abs(free_distance(r, spec) - free_distance_quadrature(r, spec)) < 1e-12);
  // Outside the support the two integrands coincide.
  CHECK(std::abs(agmon_distance(1.0, 3.0, spec) - (free_distance(3.0, spec) - free_distance(1.0, spec))) <
        1e-12);
}

TEST_CASE("three forms of the action agree") {
  const ActionForms forms = action_forms(canonical_spec());
  CHECK(forms.max_discrepancy() < 1e-10);
  const ActionForms other = action_forms(PotentialSpec::make(1.5, 3.0, 1.2, -2.0));
  CHECK(other.max_discrepancy() < 1e-10);
}

TEST_CASE("action bounds hold strictly") {
  const AgmonReport r = check_bounds(canonical_spec());
  CHECK(r.bounds_ok);
  CHECK(r.agmon_lower < r.S);
  CHECK(r.S < r.agmon_upper);
  CHECK(r.crude_lower < r.S);
  CHECK(r.S < r.crude_upper);
  CHECK(r.gamma0 == doctest::Approx(0.541204872936).epsilon(1e-10));
  // The hopping term dominates the error gate exponent.
  CHECK(2.0 * r.d_0_2Lma - r.S == doctest::Approx(1.882).epsilon(1e-3));
  CHECK(r.separation_ok);
  CHECK(r.geometry_ok);
}

TEST_CASE("separation conditions form a chain") {
  CHECK(check_separation(canonical_spec()).geometric);
  for (double L : {1.2, 1.5, 1.8, 1.87, 2.0, 3.0}) {
    const SeparationReport rep = check_separation(PotentialSpec::make(1.0, L, 1.0, -1.0));
    CHECK(rep.chain_holds());
    CHECK(rep.geometric == (L > separation_threshold));
  }
}

TEST_CASE("saddle value equals the free distance to 2L") {
  const PotentialSpec spec = canonical_spec();
  const SaddleInfo sd = saddle(spec);
  CHECK(std::abs(saddle_phase(sd.t_star, sd.t_star, spec) - free_distance_quadrature(4.0, spec)) < 1e-10);
  const LaplaceInternals lap = laplace_internals(spec);
  CHECK(std::abs(laplace_phase(lap.t_L, spec) - free_distance_quadrature(2.0, spec)) < 1e-10);
}
