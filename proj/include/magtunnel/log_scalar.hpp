#pragma once

// Sign/phase plus log-magnitude numbers for quantities like exp(-S/h) that
// leave the double range long before the physics stops being interesting.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace magtunnel {

template <typename Real> class LogReal {
public:
  LogReal() = default;

  static LogReal from_value(Real x) {
    LogReal out;
    if (x == Real(0))
      return out;
    out.sign_ = x > 0 ? 1 : -1;
    out.log_mag_ = std::log(std::abs(x));
    return out;
  }

  static LogReal from_log(int sign, Real log_mag) {
    LogReal out;
    if (sign == 0 || log_mag == -std::numeric_limits<Real>::infinity())
      return out;
    out.sign_ = sign > 0 ? 1 : -1;
    out.log_mag_ = log_mag;
    return out;
  }

  int sign() const { return sign_; }
  Real log_mag() const { return log_mag_; }
  Real log10_mag() const { return log_mag_ / std::numbers::ln10_v<Real>; }
  bool is_zero() const { return sign_ == 0; }

  /// Plain value; underflows to zero or overflows to inf when out of range.
  Real value() const { return sign_ == 0 ? Real(0) : sign_ * std::exp(log_mag_); }

  LogReal abs() const { return from_log(sign_ == 0 ? 0 : 1, log_mag_); }
  LogReal operator-() const { return from_log(-sign_, log_mag_); }

  friend LogReal operator*(LogReal x, LogReal y) {
    return from_log(x.sign_ * y.sign_, x.log_mag_ + y.log_mag_);
  }
  friend LogReal operator/(LogReal x, LogReal y) {
    return from_log(x.sign_ * y.sign_, x.log_mag_ - y.log_mag_);
  }
  friend LogReal operator+(LogReal x, LogReal y) {
    if (x.sign_ == 0)
      return y;
    if (y.sign_ == 0)
      return x;
    if (x.log_mag_ < y.log_mag_)
      std::swap(x, y);
    const Real ratio = std::exp(y.log_mag_ - x.log_mag_);
    if (x.sign_ == y.sign_)
      return from_log(x.sign_, x.log_mag_ + std::log1p(ratio));
    if (ratio == Real(1))
      return LogReal{};
    return from_log(x.sign_, x.log_mag_ + std::log1p(-ratio));
  }
  friend LogReal operator-(LogReal x, LogReal y) { return x + (-y); }

  LogReal pow(Real p) const {
    // Only meaningful for positive values.
    return from_log(sign_ == 0 ? 0 : 1, p * log_mag_);
  }

  /// x / y as a plain number; safe when both are tiny.
  friend Real ratio(LogReal x, LogReal y) {
    return x.sign_ * y.sign_ * std::exp(x.log_mag_ - y.log_mag_);
  }

private:
  int sign_ = 0;
  Real log_mag_ = -std::numeric_limits<Real>::infinity();
};

using LogScalar = LogReal<double>;

/// Wraps an angle to (-pi, pi].
template <typename Real> Real wrap_phase(Real phase) {
  constexpr Real two_pi = 2 * std::numbers::pi_v<Real>;
  Real out = std::remainder(phase, two_pi);
  if (out <= -std::numbers::pi_v<Real>)
    out += two_pi;
  return out;
}

template <typename Real> class LogComplexT {
public:
  LogComplexT() = default;
  LogComplexT(Real log_mag, Real phase)
      : log_mag_(log_mag), phase_(wrap_phase(phase)) {}

  static LogComplexT from_value(std::complex<Real> z) {
    if (z == std::complex<Real>(0))
      return {};
    return {std::log(std::abs(z)), std::arg(z)};
  }

  /// scale * exp(log_offset), without forming exp(log_offset).
  static LogComplexT from_scaled(std::complex<Real> scale, Real log_offset) {
    LogComplexT out = from_value(scale);
    if (!out.is_zero())
      out.log_mag_ += log_offset;
    return out;
  }

  static LogComplexT from_real(LogReal<Real> x) {
    if (x.is_zero())
      return {};
    return {x.log_mag(), x.sign() > 0 ? Real(0) : std::numbers::pi_v<Real>};
  }

  Real log_mag() const { return log_mag_; }
  Real log10_mag() const { return log_mag_ / std::numbers::ln10_v<Real>; }
  Real phase() const { return phase_; }
  bool is_zero() const { return log_mag_ == -std::numeric_limits<Real>::infinity(); }

  std::complex<Real> value() const {
    return is_zero() ? std::complex<Real>(0) : std::polar(std::exp(log_mag_), phase_);
  }

  LogReal<Real> modulus() const { return LogReal<Real>::from_log(is_zero() ? 0 : 1, log_mag_); }
  LogComplexT conj() const { return is_zero() ? *this : LogComplexT(log_mag_, -phase_); }

  friend LogComplexT operator*(LogComplexT x, LogComplexT y) {
    if (x.is_zero() || y.is_zero())
      return {};
    return {x.log_mag_ + y.log_mag_, x.phase_ + y.phase_};
  }
  friend LogComplexT operator/(LogComplexT x, LogComplexT y) {
    return {x.log_mag_ - y.log_mag_, x.phase_ - y.phase_};
  }
  friend LogComplexT operator+(LogComplexT x, LogComplexT y) {
    if (x.is_zero())
      return y;
    if (y.is_zero())
      return x;
    const Real ref = std::max(x.log_mag_, y.log_mag_);
    const std::complex<Real> sum = std::polar(std::exp(x.log_mag_ - ref), x.phase_) +
                                   std::polar(std::exp(y.log_mag_ - ref), y.phase_);
    return from_scaled(sum, ref);
  }
  friend LogComplexT operator-(LogComplexT x, LogComplexT y) {
    if (y.is_zero())
      return x;
    return x + LogComplexT(y.log_mag_, y.phase_ + std::numbers::pi_v<Real>);
  }

private:
  Real log_mag_ = -std::numeric_limits<Real>::infinity();
  Real phase_ = 0;
};

using LogComplex = LogComplexT<double>;

} // namespace magtunnel
