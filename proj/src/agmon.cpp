#include "magtunnel/agmon.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "magtunnel/errors.hpp"
#include "magtunnel/quadrature.hpp"

namespace magtunnel {

namespace {

const QuadratureOptions action_quadrature{1e-12, 1e-15, 4000};

std::vector<double> split_at_support(double r1, double r2, double a) {
  std::vector<double> pts{r1};
  if (a > r1 && a < r2)
    pts.push_back(a);
  pts.push_back(r2);
  return pts;
}

} // namespace

double agmon_distance(double r1, double r2, const PotentialSpec &spec) {
  if (!(r1 >= 0.0 && r2 >= r1))
    throw DomainError("agmon_distance needs 0 <= r1 <= r2");
  if (r1 == r2)
    return 0.0;
  auto integrand = [&](double r) { return std::sqrt(eval_effective_excess(r, spec)); };
  return integrate_or_throw(integrand, split_at_support(r1, r2, spec.a), action_quadrature,
                            "agmon_distance");
}

double free_distance(double r, const PotentialSpec &spec) {
  if (r <= 0.0)
    return 0.0;
  const double k = 0.5 * spec.B;
  const double c = -spec.v0;
  const double root = std::sqrt(k * k * r * r + c);
  if (c == 0.0)
    return 0.5 * k * r * r;
  return 0.5 * r * root + 0.5 * c / k * std::asinh(k * r / std::sqrt(c));
}

double free_distance_quadrature(double r, const PotentialSpec &spec) {
  if (r <= 0.0)
    return 0.0;
  const double B2 = spec.B * spec.B;
  auto integrand = [&](double s) { return std::sqrt(0.25 * B2 * s * s - spec.v0); };
  const std::vector<double> pts{0.0, r};
  return integrate_or_throw(integrand, pts, action_quadrature, "free_distance");
}

double ActionForms::max_discrepancy() const {
  return std::max({std::abs(defining - mixed), std::abs(defining - doubled),
                   std::abs(mixed - doubled)});
}

ActionForms action_forms(const PotentialSpec &spec) {
  const double L = spec.L;
  const double B2 = spec.B * spec.B;
  const double d0L = agmon_distance(0.0, L, spec);
  const double d02L = agmon_distance(0.0, L, spec) + agmon_distance(L, 2.0 * L, spec);

  auto magnetic_excess = [&](double r) {
    const double far = 2.0 * L - r;
    return std::sqrt(0.25 * B2 * far * far - spec.v0) - std::sqrt(0.25 * B2 * r * r - spec.v0);
  };
  const std::vector<double> pts{0.0, L};
  const double extra = integrate_or_throw(magnetic_excess, pts, action_quadrature, "action_S");

  ActionForms forms;
  forms.defining = 2.0 * d0L + extra;
  forms.mixed = d02L + d0L - free_distance(L, spec);
  forms.doubled = 2.0 * d02L - free_distance(2.0 * L, spec);
  return forms;
}

double action_S(const PotentialSpec &spec) {
  const ActionForms forms = action_forms(spec);
  if (forms.max_discrepancy() > 1e-10)
    throw InternalInconsistency("action forms disagree by " +
                                std::to_string(forms.max_discrepancy()));
  return forms.defining;
}

AgmonReport check_bounds(const PotentialSpec &spec) {
  const double L = spec.L, a = spec.a, B = spec.B;
  AgmonReport rep;
  rep.d_0_a = agmon_distance(0.0, a, spec);
  rep.d_0_L = rep.d_0_a + agmon_distance(a, L, spec);
  rep.d_0_2Lma = rep.d_0_L + agmon_distance(L, 2.0 * L - a, spec);
  rep.d_2Lma_2L = agmon_distance(2.0 * L - a, 2.0 * L, spec);
  rep.d_0_2L = rep.d_0_2Lma + rep.d_2Lma_2L;
  rep.dt_L = free_distance(L, spec);
  rep.dt_2L = free_distance(2.0 * L, spec);
  rep.dt_2Lma = free_distance(2.0 * L - a, spec);
  rep.S = action_S(spec);

  const auto *profile = spec.profile.get();
  auto gamma_integrand = [&](double r) { return std::sqrt(profile->excess(r)); };
  rep.gamma0 = a > 0.0 ? integrate_or_throw(gamma_integrand, std::vector<double>{0.0, a},
                                            action_quadrature, "gamma0")
                       : 0.0;

  rep.agmon_lower = rep.d_0_2Lma + rep.d_0_a;
  rep.agmon_upper = rep.d_0_2L;
  rep.crude_lower = B * L * L - B * L * a;
  rep.crude_upper = B * L * L + 2.0 * std::sqrt(-spec.v0) * L + rep.gamma0;
  rep.bounds_ok = rep.agmon_lower <= rep.S && rep.S <= rep.agmon_upper &&
                  rep.crude_lower <= rep.S && rep.S <= rep.crude_upper;

  const SeparationReport sep = check_separation(spec);
  rep.separation_ok = sep.raw;
  rep.geometry_ok = sep.geometric;
  return rep;
}

SeparationReport check_separation(const PotentialSpec &spec) {
  const double L = spec.L, a = spec.a;
  SeparationReport sep;
  sep.geometric = L > separation_threshold * a;
  sep.integral = agmon_distance(2.0 * L - a, 2.0 * L, spec) < free_distance(2.0 * L - a, spec);
  sep.raw = action_S(spec) < 2.0 * agmon_distance(0.0, 2.0 * L - a, spec);
  return sep;
}

} // namespace magtunnel
