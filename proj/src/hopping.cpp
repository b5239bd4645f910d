#include "magtunnel/hopping.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "magtunnel/agmon.hpp"
#include "magtunnel/errors.hpp"
#include "magtunnel/quadrature.hpp"

namespace magtunnel {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double truncation_nats = 60.0;

// Moves from `from` along `dir` until f drops below level, then bisects.
template <typename Fn> double find_edge(Fn &&f, double from, double dir, double level,
                                        double first_step, double limit) {
  double step = first_step;
  double inside = from;
  double outside = from + dir * step;
  while (f(outside) >= level) {
    inside = outside;
    step *= 2.0;
    if (step > limit)
      throw TruncationError("integrand has not decayed 60 nats within the search range");
    outside = from + dir * step;
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (inside + outside);
    (f(mid) >= level ? inside : outside) = mid;
  }
  return outside;
}

// log omega(t, s) with sigma - 1 = t + s kept exact.
double log_weight(double t_plus_s) {
  const double sigma = 1.0 + t_plus_s;
  return -1.5 * std::log(sigma) + std::log(t_plus_s) + std::log(sigma + 1.0);
}

} // namespace

double gauge_phase(Side side, double x, double y, const PotentialSpec &spec) {
  const double half_b = 0.5 * spec.B;
  return side == Side::left ? half_b * y * (spec.L - x) : -half_b * y * (spec.L + x);
}

LogComplex translated_state(Side side, double x, double y, const TailModel &model,
                            const PotentialSpec &spec, double h, const RadialState *interior) {
  const double centre = side == Side::left ? -spec.L : spec.L;
  const double rho = std::hypot(x - centre, y);
  double log_mod;
  if (rho > spec.a) {
    log_mod = tail_value(rho, model, spec, h).log_mag();
  } else if (interior != nullptr) {
    log_mod = std::log(interior->value_at(rho));
  } else {
    throw DomainError("point lies inside the well support and no interior state was given");
  }
  return LogComplex(log_mod, -gauge_phase(side, x, y, spec) / h);
}

double saddle_phase(double t, double s, const PotentialSpec &spec) {
  const double B = spec.B, L = spec.L, depth = -spec.v0;
  const double sigma = 1.0 + t + s;
  return 0.5 * B * L * L * (sigma + 1.0 / sigma) +
         depth / (2.0 * B) * (std::log((1.0 + t) / t) + std::log((1.0 + s) / s));
}

double hopping_weight(double t, double s) { return std::exp(log_weight(t + s)); }

SaddleInfo saddle(const PotentialSpec &spec) {
  const double B = spec.B, L = spec.L, depth = -spec.v0;
  SaddleInfo out;
  out.N = depth / (B * B * L * L);
  const double rootN = std::sqrt(out.N), root1N = std::sqrt(1.0 + out.N);
  out.t_star = 0.5 * rootN - 0.5 + 0.5 * root1N;
  out.g_star = B * L * L * (root1N + out.N * std::log((1.0 + root1N) / rootN));

  const double t = out.t_star;
  const double sigma = 1.0 + 2.0 * t;
  const double cross = B * L * L / (sigma * sigma * sigma);
  const double diag = cross + depth / (2.0 * B) * (2.0 * t + 1.0) / (t * t * (1.0 + t) * (1.0 + t));
  out.hess_det = diag * diag - cross * cross;
  out.gradient_residual =
      std::abs(0.5 * B * L * L * (1.0 - 1.0 / (sigma * sigma)) - depth / (2.0 * B) / (t * (1.0 + t)));
  return out;
}

LogComplex hopping_line_integral(const TailModel &model, const PotentialSpec &spec, double h) {
  const double B = spec.B, L = spec.L, alpha = model.alpha;
  const double eta = L / (1.0 + 2.0 * saddle(spec).t_star);
  const double base_re = L * L - eta * eta;
  const double env0 = tail_log_envelope(base_re, alpha, B, h);
  auto decay = [&](double y) { return 2.0 * (tail_log_envelope(base_re + y * y, alpha, B, h) - env0); };
  const double Y = find_edge(decay, 0.0, 1.0, -truncation_nats, 0.5 * std::sqrt(h / B), 1e3 * L);

  // Scaled integrand: everything relative to exp(2 E(0) - B L eta / h).
  auto integrand = [&](double y) {
    const std::complex<double> z(y, -eta);
    const std::complex<double> Z = L * L + z * z;
    const TailIntegrals I = tail_integrals(Z, alpha, B, h);
    const double mag = std::exp(2.0 * (I.log_scale - env0));
    const std::complex<double> phase = std::polar(mag, -B * L * y / h);
    const std::complex<double> i(0.0, 1.0);
    return phase * I.plain * ((i * B * z / h) * I.plain - (B * L / h) * I.weighted);
  };
  const std::vector<double> pts{-Y, 0.0, Y};
  const double boundary = std::abs(integrand(Y)) + std::abs(integrand(-Y));
  const double centre = std::abs(integrand(0.0));
  if (boundary > std::exp(-truncation_nats + 5.0) * centre)
    throw TruncationError("line integrand at |y| = Y is not negligible");
  const std::complex<double> J =
      integrate_or_throw(integrand, pts, QuadratureOptions{1e-16 * centre * Y, 1e-11, 20000},
                         "hopping line integral");
  const double log_offset = 2.0 * env0 - B * L * eta / h + 2.0 * std::log(h) +
                            2.0 * model.C_h_matched.log_mag();
  return LogComplex::from_scaled(J, log_offset);
}

LogScalar hopping_reduced_integral(const TailModel &model, const PotentialSpec &spec, double h,
                                   bool symmetrized) {
  const double B = spec.B, L = spec.L, alpha = model.alpha;
  const double k = B * L * L / (2.0 * h);
  auto log_integrand = [&](double u, double v) {
    const double t = std::exp(u), s = std::exp(v);
    const double sigma = 1.0 + t + s;
    return -k * (sigma + 1.0 / sigma) + alpha * (u + v) - alpha * (std::log1p(t) + std::log1p(s)) +
           log_weight(t + s);
  };

  // Peak on the diagonal by golden-section search.
  const double centre = std::log(saddle(spec).t_star);
  double lo = centre - 30.0, hi = centre + 10.0;
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double m1 = hi - golden * (hi - lo), m2 = lo + golden * (hi - lo);
    if (log_integrand(m1, m1) < log_integrand(m2, m2))
      lo = m1;
    else
      hi = m2;
  }
  const double u_peak = 0.5 * (lo + hi);
  const double peak = log_integrand(u_peak, u_peak);

  auto slice = [&](double u) { return log_integrand(u, u_peak); };
  const double level = peak - truncation_nats - 10.0;
  const double u_lo = find_edge(slice, u_peak, -1.0, level, 0.5, 1e4);
  const double u_hi = find_edge(slice, u_peak, +1.0, level, 0.5, 1e4);

  const QuadratureOptions inner_opts{1e-18, 1e-12, 20000};
  auto inner = [&](double u) {
    const double top = symmetrized ? std::min(u, u_hi) : u_hi;
    if (top <= u_lo)
      return 0.0;
    auto f = [&](double v) { return std::exp(log_integrand(u, v) - peak); };
    const std::vector<double> pts{u_lo, std::clamp(u_peak, u_lo, top), top};
    return integrate_or_throw(f, pts, inner_opts, "reduced integral (inner)");
  };
  const std::vector<double> pts{u_lo, u_peak, u_hi};
  double J = integrate_or_throw(inner, pts, QuadratureOptions{1e-18, 1e-11, 20000},
                                "reduced integral (outer)");
  if (symmetrized)
    J *= 2.0;
  const double log_mag = 1.5 * std::log(h) + 2.0 * model.C_h_matched.log_mag() +
                         0.5 * std::log(2.0 * pi * B * L * L) + peak + std::log(J);
  return LogScalar::from_log(-1, log_mag);
}

LogScalar hopping_asymptotic(const TailModel &model, const PotentialSpec &spec, double h,
                             LogScalar C_h) {
  const SaddleInfo sd = saddle(spec);
  const double nu = model.nu;
  const double t = sd.t_star;
  const double log_mag = 2.5 * std::log(h) + 2.0 * C_h.log_mag() + 1.5 * std::log(2.0 * pi) +
                         0.5 * std::log(spec.B * spec.L * spec.L) - 0.5 * std::log(sd.hess_det) +
                         log_weight(2.0 * t) + (2.0 * nu - 2.0) * std::log(t) -
                         2.0 * nu * std::log1p(t) - sd.g_star / h;
  return LogScalar::from_log(-1, log_mag);
}

double tunneling_constant(const PotentialSpec &spec) {
  const SaddleInfo sd = saddle(spec);
  const LaplaceInternals lap = laplace_internals(spec);
  const double nu = lap.nu, t = sd.t_star, tL = lap.t_L;
  const double K_L = wkb_prefactor(spec.L, spec);
  const double log_c = 1.5 * std::log(2.0 * pi) + 0.5 * std::log(spec.B * spec.L * spec.L) -
                       0.5 * std::log(sd.hess_det) + log_weight(2.0 * t) +
                       (2.0 * nu - 2.0) * std::log(t) - 2.0 * nu * std::log1p(t) +
                       2.0 * std::log(K_L) + std::log(lap.fpp_tL / (2.0 * pi)) +
                       (2.0 - 2.0 * nu) * std::log(tL) + 2.0 * nu * std::log1p(tL);
  return std::exp(log_c);
}

HoppingReport compute_hopping(const TailModel &model, const PotentialSpec &spec, double h,
                              bool with_line) {
  HoppingReport rep;
  rep.h = h;
  const SaddleInfo sd = saddle(spec);
  rep.t_star = sd.t_star;
  rep.g_star = sd.g_star;
  rep.hess_det = sd.hess_det;
  rep.S = action_S(spec);
  rep.d_0_2Lma = agmon_distance(0.0, 2.0 * spec.L - spec.a, spec);
  rep.C_BLv = tunneling_constant(spec);
  if (with_line)
    rep.w_line = hopping_line_integral(model, spec, h);
  rep.w_reduced = hopping_reduced_integral(model, spec, h);
  rep.w_laplace = hopping_asymptotic(model, spec, h, model.C_h_matched);
  rep.w_laplace_asym = hopping_asymptotic(model, spec, h, model.C_h_asymptotic);
  rep.gap_pred = LogScalar::from_value(2.0) * rep.w_reduced.abs();
  return rep;
}

GapPrediction gap_prediction(const HoppingReport &report, double mu_h) {
  GapPrediction out;
  const double w = report.w_reduced.abs().value();
  out.lambda1 = mu_h - w;
  out.lambda2 = mu_h + w;
  out.gap = LogScalar::from_value(2.0) * report.w_reduced.abs();
  const double log_rho =
      -3.0 * std::log(report.h) - 2.0 * report.d_0_2Lma / report.h - report.w_reduced.log_mag();
  out.rho = std::exp(log_rho);
  out.log10_rho = log_rho / std::numbers::ln10;
  out.reliable = out.rho < 0.1;
  return out;
}

} // namespace magtunnel
