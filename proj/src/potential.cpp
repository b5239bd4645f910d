#include "magtunnel/potential.hpp"

#include <cfloat>
#include <cmath>

#include "magtunnel/errors.hpp"

namespace magtunnel {

namespace {
// Below this exponent exp() returns a subnormal; we return an exact zero.
const double min_exponent = std::log(DBL_MIN);
} // namespace

BumpProfile::BumpProfile(double a, double v0) : a_(a), v0_(v0) {}

double BumpProfile::value(double r) const {
  if (r >= a_)
    return 0.0;
  const double e = 1.0 - a_ * a_ / ((a_ - r) * (a_ + r));
  if (e < min_exponent)
    return 0.0;
  return v0_ * std::exp(e);
}

double BumpProfile::excess(double r) const {
  if (r >= a_)
    return -v0_;
  // v - v0 = v0 * expm1(-r^2 / (a^2 - r^2))
  const double e = -r * r / ((a_ - r) * (a_ + r));
  return v0_ * std::expm1(e);
}

double BumpProfile::derivative(double r) const {
  if (r >= a_)
    return 0.0;
  const double gap = (a_ - r) * (a_ + r);
  const double e = 1.0 - a_ * a_ / gap;
  if (e < min_exponent)
    return 0.0;
  return v0_ * std::exp(e) * (-2.0 * a_ * a_ * r / (gap * gap));
}

PotentialSpec PotentialSpec::make(double B, double L, double a, double v0,
                                  const std::string &profile) {
  if (!(B > 0.0))
    throw InvariantViolation("B must be positive (got " + std::to_string(B) + ")");
  if (!(a > 0.0))
    throw InvariantViolation("support radius a must be positive");
  if (!(L > a))
    throw InvariantViolation("wells overlap: need L > a (L=" + std::to_string(L) +
                             ", a=" + std::to_string(a) + ")");
  if (!(v0 < 0.0))
    throw InvariantViolation("well depth v0 must be negative");
  PotentialSpec spec;
  spec.B = B;
  spec.L = L;
  spec.a = a;
  spec.v0 = v0;
  if (profile == "bump")
    spec.profile = std::make_shared<BumpProfile>(a, v0);
  else
    throw InvariantViolation("unknown profile '" + profile + "'");
  spec.vpp0 = spec.profile->second_derivative_at_origin();
  if (!(spec.vpp0 > 0.0))
    throw InvariantViolation("degenerate minimum: v''(0) must be positive");
  return spec;
}

PotentialSpec PotentialSpec::free_field(double B, double L) {
  PotentialSpec spec;
  spec.B = B;
  spec.L = L;
  spec.a = 0.0;
  spec.v0 = 0.0;
  spec.vpp0 = 0.0;
  spec.profile = std::make_shared<FreeProfile>();
  return spec;
}

double PotentialSpec::harmonic_frequency() const { return std::sqrt(B * B + 2.0 * vpp0); }

double eval_single_well(double r, const PotentialSpec &spec) { return spec.profile->value(r); }

double eval_effective(double r, const PotentialSpec &spec) {
  return 0.25 * spec.B * spec.B * r * r + spec.profile->value(r);
}

double eval_effective_derivative(double r, const PotentialSpec &spec) {
  return 0.5 * spec.B * spec.B * r + spec.profile->derivative(r);
}

double eval_effective_excess(double r, const PotentialSpec &spec) {
  return 0.25 * spec.B * spec.B * r * r + spec.profile->excess(r);
}

double eval_double_well(double x, double y, const PotentialSpec &spec) {
  const double right = std::hypot(x - spec.L, y);
  const double left = std::hypot(x + spec.L, y);
  return spec.profile->value(right) + spec.profile->value(left);
}

} // namespace magtunnel
