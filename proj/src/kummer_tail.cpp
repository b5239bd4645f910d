#include "magtunnel/kummer_tail.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "magtunnel/agmon.hpp"
#include "magtunnel/errors.hpp"
#include "magtunnel/quadrature.hpp"

namespace magtunnel {

namespace {

constexpr double truncation_nats = 60.0;

// Real part of the log-integrand in s = ln t, plus k ln(1+2t).
struct Envelope {
  double c;     // B Re(z) / (4h)
  double alpha;
  double operator()(double s, int k) const {
    const double t = std::exp(s);
    double e = -c * (1.0 + 2.0 * t) + alpha * s - alpha * std::log1p(t);
    if (k == 1)
      e += std::log1p(2.0 * t);
    return e;
  }
};

// Walks away from `from` in direction `dir` until env < level, then bisects.
template <typename Fn> double edge(Fn &&env, double from, double dir, double level) {
  double step = 1.0;
  double inside = from;
  double outside = from + dir * step;
  int guard = 0;
  while (env(outside) >= level) {
    inside = outside;
    step *= 2.0;
    outside = from + dir * step;
    if (++guard > 60)
      throw TruncationError("tail integrand does not decay");
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (inside + outside);
    (env(mid) >= level ? inside : outside) = mid;
  }
  return outside;
}

double envelope_peak_location(const Envelope &env) {
  // Peak of the k = 0 envelope: 2c t (1+t) = alpha.
  const double ratio = env.alpha / (2.0 * env.c);
  return std::log(2.0 * ratio / (1.0 + std::sqrt(1.0 + 4.0 * ratio)));
}

} // namespace

double tail_log_envelope(double re_z, double alpha, double B, double h) {
  const Envelope env{B * re_z / (4.0 * h), alpha};
  return env(envelope_peak_location(env), 0);
}

TailIntegrals tail_integrals(std::complex<double> z, double alpha, double B, double h) {
  if (!(z.real() > 0.0))
    throw DomainError("tail integral needs Re(|X|^2) > 0");
  if (!(alpha > 0.0))
    throw DomainError("tail integral needs alpha > 0");
  const Envelope env{B * z.real() / (4.0 * h), alpha};
  const double s0 = envelope_peak_location(env);
  const double peak = env(s0, 0);
  const double level = peak - truncation_nats;
  auto wide = [&](double s) { return env(s, 1); };
  const double s_lo = edge(wide, s0, -1.0, level);
  const double s_hi = edge(wide, s0, +1.0, level);

  // Oscillating part from Im z.
  const double omega = B * z.imag() / (4.0 * h);
  auto plain = [&](double s) {
    const double t = std::exp(s);
    const double mag = std::exp(env(s, 0) - peak);
    return std::polar(mag, -omega * (1.0 + 2.0 * t));
  };
  auto weighted = [&](double s) { return (1.0 + 2.0 * std::exp(s)) * plain(s); };

  const QuadratureOptions opts{1e-15 * (s_hi - s_lo), 1e-13, 20000};
  const std::vector<double> pts{s_lo, s0, s_hi};
  TailIntegrals out;
  out.log_scale = peak;
  out.plain = integrate_or_throw(plain, pts, opts, "tail integral");
  out.weighted = integrate_or_throw(weighted, pts, opts, "weighted tail integral");
  return out;
}

double laplace_phase(double t, const PotentialSpec &spec) {
  const double B = spec.B, L = spec.L, depth = -spec.v0;
  return 0.25 * B * L * L * (1.0 + 2.0 * t) + depth / (2.0 * B) * std::log((1.0 + t) / t);
}

double laplace_phase_derivative(double t, const PotentialSpec &spec) {
  const double B = spec.B, L = spec.L, depth = -spec.v0;
  return 0.5 * B * L * L - depth / (2.0 * B) / (t * (1.0 + t));
}

LaplaceInternals laplace_internals(const PotentialSpec &spec) {
  const double B = spec.B, L = spec.L, depth = -spec.v0;
  LaplaceInternals out;
  const double q = 4.0 * depth / (B * B * L * L);
  out.t_L = 0.5 * q / (1.0 + std::sqrt(1.0 + q)); // = (sqrt(1+q) - 1)/2
  out.fpp_tL = B * B * L * L * L / (2.0 * depth) * std::sqrt(B * B * L * L + 4.0 * depth);
  const double t = out.t_L;
  out.fpp_tL_direct = depth / (2.0 * B) * (2.0 * t + 1.0) / (t * t * (1.0 + t) * (1.0 + t));
  out.f_tL = laplace_phase(t, spec);
  out.fprime_residual = std::abs(laplace_phase_derivative(t, spec));
  out.nu = 0.5 - spec.harmonic_frequency() / (2.0 * B);
  return out;
}

LogScalar tail_value(double r, const TailModel &model, const PotentialSpec &spec, double h) {
  if (!(r > spec.a))
    throw DomainError("integral representation holds only for r > a");
  const TailIntegrals I = tail_integrals({r * r, 0.0}, model.alpha, spec.B, h);
  return model.C_h_matched * LogScalar::from_log(1, I.log_scale + std::log(I.plain.real()));
}

LogScalar tail_derivative(double r, const TailModel &model, const PotentialSpec &spec, double h) {
  if (!(r > spec.a))
    throw DomainError("integral representation holds only for r > a");
  const TailIntegrals I = tail_integrals({r * r, 0.0}, model.alpha, spec.B, h);
  const double log_mag = I.log_scale + std::log(I.weighted.real()) + std::log(spec.B * r / (2.0 * h));
  return model.C_h_matched * LogScalar::from_log(-1, log_mag);
}

LogScalar asymptotic_C_h(const PotentialSpec &spec, double h, double K_L) {
  const LaplaceInternals lap = laplace_internals(spec);
  const double L = spec.L;
  const double log_c = -std::log(h) + std::log(K_L) +
                       0.5 * std::log(lap.fpp_tL / (2.0 * std::numbers::pi)) +
                       (1.0 - lap.nu) * std::log(lap.t_L) + lap.nu * std::log1p(lap.t_L) +
                       (free_distance(L, spec) - agmon_distance(0.0, L, spec)) / h;
  return LogScalar::from_log(1, log_c);
}

TailModel match_normalization(const RadialState &state, const PotentialSpec &spec, double h) {
  if (!(state.r_max() > spec.a))
    throw DomainError("radial grid does not extend beyond the support");
  TailModel model;
  model.h = h;
  model.mu_h = state.mu_h;
  model.alpha = 0.5 - state.mu_h / (2.0 * spec.B * h);

  Eigen::Index node = state.node_at_or_above(spec.a);
  if (!(state.r[node] > spec.a))
    ++node;
  const double r = state.r[node];
  model.match_radius = r;

  const TailIntegrals I = tail_integrals({r * r, 0.0}, model.alpha, spec.B, h);
  const double log_bare = I.log_scale + std::log(I.plain.real());
  model.C_h_matched = LogScalar::from_log(1, std::log(state.u[node]) - log_bare);

  const double tail_log_derivative = -spec.B * r / (2.0 * h) * I.weighted.real() / I.plain.real();
  model.match_residual = std::abs(state.log_derivative_at_node(node) - tail_log_derivative);
  if (model.match_residual > 1e-2)
    throw MatchFailure("log-derivative mismatch " + std::to_string(model.match_residual) +
                       " at r = " + std::to_string(r));

  const LaplaceInternals lap = laplace_internals(spec);
  model.t_L = lap.t_L;
  model.fpp_tL = lap.fpp_tL;
  model.nu = lap.nu;
  model.C_h_asymptotic = asymptotic_C_h(spec, h, wkb_prefactor(spec.L, spec));
  return model;
}

double tail_ode_residual(double r, const TailModel &model, const PotentialSpec &spec, double h) {
  const double d = 0.01 * h;
  if (r - 2.0 * d <= spec.a)
    throw DomainError("tail_ode_residual: stencil reaches into the well support");
  const double centre = tail_value(r, model, spec, h).log_mag();
  auto rel = [&](double x) { return std::exp(tail_value(x, model, spec, h).log_mag() - centre); };
  const double m2 = rel(r - 2.0 * d), m1 = rel(r - d), p1 = rel(r + d), p2 = rel(r + 2.0 * d);
  const double first = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * d);
  const double second = (-m2 + 16.0 * m1 - 30.0 + 16.0 * p1 - p2) / (12.0 * d * d);
  const double potential = eval_effective(r, spec) - model.mu_h;
  return std::abs(-h * h * (second + first / r) + potential) / std::abs(potential);
}

} // namespace magtunnel
