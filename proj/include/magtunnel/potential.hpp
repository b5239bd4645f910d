#pragma once

#include <memory>
#include <string>

namespace magtunnel {

/// A radial single-well profile v(r). Implementations must be smooth, vanish
/// identically for r >= support_radius() and reach their unique minimum at 0.
class RadialProfile {
public:
  virtual ~RadialProfile() = default;
  virtual std::string name() const = 0;
  virtual double value(double r) const = 0;
  /// v(r) - v(0), computed without cancellation near the origin.
  virtual double excess(double r) const = 0;
  virtual double derivative(double r) const = 0;
  virtual double second_derivative_at_origin() const = 0;
  virtual double support_radius() const = 0;
  virtual double depth() const = 0; // v(0)
};

/// v(r) = v0 * exp(1 - a^2 / (a^2 - r^2)) inside the disk, exactly 0 outside.
class BumpProfile final : public RadialProfile {
public:
  BumpProfile(double a, double v0);
  std::string name() const override { return "bump"; }
  double value(double r) const override;
  double excess(double r) const override;
  double derivative(double r) const override;
  double second_derivative_at_origin() const override { return -2.0 * v0_ / (a_ * a_); }
  double support_radius() const override { return a_; }
  double depth() const override { return v0_; }

private:
  double a_, v0_;
};

/// v = 0. Only for the free magnetic operator (Landau levels, closed-form
/// Agmon distances); it does not satisfy the well assumptions.
class FreeProfile final : public RadialProfile {
public:
  std::string name() const override { return "none"; }
  double value(double) const override { return 0.0; }
  double excess(double) const override { return 0.0; }
  double derivative(double) const override { return 0.0; }
  double second_derivative_at_origin() const override { return 0.0; }
  double support_radius() const override { return 0.0; }
  double depth() const override { return 0.0; }
};

/// Physical parameters of one problem instance. Immutable once built.
struct PotentialSpec {
  double B = 1.0;
  double L = 2.0;
  double a = 1.0;
  double v0 = -1.0;
  double vpp0 = 2.0;
  std::shared_ptr<const RadialProfile> profile;

  /// Validates B > 0, L > a > 0, v0 < 0 and builds the named profile.
  /// Throws InvariantViolation otherwise.
  static PotentialSpec make(double B, double L, double a, double v0,
                            const std::string &profile = "bump");

  /// v = 0 everywhere; L only positions the (empty) wells.
  static PotentialSpec free_field(double B, double L);

  bool has_well() const { return a > 0.0; }
  /// sqrt(B^2 + 2 v''(0)): the harmonic level spacing of the single well over h.
  double harmonic_frequency() const;
};

double eval_single_well(double r, const PotentialSpec &spec);
double eval_effective(double r, const PotentialSpec &spec);
double eval_double_well(double x, double y, const PotentialSpec &spec);

/// Derivative of v_B(r) = B^2 r^2 / 4 + v(r).
double eval_effective_derivative(double r, const PotentialSpec &spec);
/// v_B(r) - v0 >= 0, cancellation-free near r = 0.
double eval_effective_excess(double r, const PotentialSpec &spec);

} // namespace magtunnel
