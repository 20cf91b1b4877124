#include "crq/state_evolution.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "crq/errors.hpp"
#include "crq/normal.hpp"
#include "crq/scalar_core.hpp"

namespace crq {

namespace {

// Bracketed root of a scalar function via TOMS 748. Requires f(lo), f(hi) of opposite sign.
template <class F>
double bracketed_root(F&& f, double lo, double hi, double f_lo, double f_hi, int max_iter,
                      const char* what) {
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
  const auto tol = [](double x, double y) {
    return std::abs(x - y) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                  std::max(std::abs(x), std::abs(y));
  };
  const auto [l, u] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tol, iters);
  if (iters >= static_cast<std::uintmax_t>(max_iter)) {
    throw NonConvergence(std::string(what) + ": root bracket did not close within " +
                         std::to_string(max_iter) + " iterations");
  }
  // Return the endpoint with the smaller residual.
  return std::abs(f(l)) <= std::abs(f(u)) ? l : u;
}

}  // namespace

void ModelParams::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("delta must be positive");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be positive");
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be nonnegative");
  if (!(sigma2 >= 0.0) || std::isnan(sigma2)) throw ConfigError("sigma2 must be nonnegative");
}

double FixedPoint::tau() const { return std::sqrt(tau2); }

std::array<double, 2> fixed_point_residuals(double tau2, double gamma, double a, double delta,
                                            double rho) {
  const auto k = kernels_closed_form(std::sqrt(tau2), {a, gamma});
  return {std::abs(tau2 - 1.0 - k.m2 / delta), std::abs(gamma * (1.0 - k.d1 / delta) - rho)};
}

double solve_tau2(double a, double gamma, double delta, double tol, int max_iter) {
  if (a <= 0.0) return 1.0;
  const DenoiserParams p{a, gamma};
  // g(t) = 1 + m2(sqrt t) / delta - t is concave in t with g(1) > 0 and
  // g(1 + a^2 / delta) < 0, so Newton started on the right descends
  // monotonically onto the root.
  double t = 1.0 + a * a / delta;
  for (int it = 0; it < max_iter; ++it) {
    const double tau = std::sqrt(t);
    const double g = 1.0 + kernels_closed_form(tau, p).m2 / delta - t;
    const double slope = m2_slope_in_tau2(tau, p) / delta - 1.0;
    const double step = g / slope;
    const double next = std::max(1.0, t - step);
    if (std::abs(next - t) <= tol * t) return next;
    t = next;
  }
  throw NonConvergence("solve_tau2: Newton iteration did not settle");
}

FixedPoint solve_fixed_point(double a, const ModelParams& params, const FixedPointOptions& opts) {
  if (a < 0.0) throw ConfigError("box level must be nonnegative");
  const double delta = params.delta;
  const double rho = params.analysis_rho();

  const auto calibration = [&](double gamma) {
    const double t = solve_tau2(a, gamma, delta);
    const double d1 = kernels_closed_form(std::sqrt(t), {a, gamma}).d1;
    return gamma * (1.0 - d1 / delta) - rho;
  };

  // calibration(0+) = -rho < 0 and calibration grows without bound.
  double lo = 0.0;
  double f_lo = -rho;
  double hi = opts.gamma_init > 0.0 ? opts.gamma_init : 1.0;
  double f_hi = calibration(hi);
  int doublings = 0;
  while (f_hi <= 0.0) {
    if (++doublings > 200) throw NonConvergence("solve_fixed_point: no sign change in gamma");
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
    f_hi = calibration(hi);
  }

  FixedPoint fp;
  fp.a = a;
  fp.gamma = bracketed_root(calibration, lo, hi, f_lo, f_hi, opts.max_iter, "solve_fixed_point");
  fp.tau2 = solve_tau2(a, fp.gamma, delta);
  fp.residuals = fixed_point_residuals(fp.tau2, fp.gamma, a, delta, rho);
  if (fp.residuals[0] > 1e-10 || fp.residuals[1] > 1e-10) {
    throw NonConvergence("solve_fixed_point: residuals above 1e-10 at a=" + std::to_string(a));
  }
  return fp;
}

double risk_f(const FixedPoint& fp, const ModelParams& params) {
  const double d = params.delta;
  const double rho = params.analysis_rho();
  const double ratio = rho / fp.gamma;
  return d * rho * (fp.tau2 - 1.0) + d * ratio * ratio * fp.tau2 + params.lambda * fp.a * fp.a;
}

double risk_f(double a, const ModelParams& params) {
  return risk_f(solve_fixed_point(a, params), params);
}

double risk_f_derivative(const FixedPoint& fp, const ModelParams& params) {
  const double rho = params.analysis_rho();
  const double overshoot = clipped_overshoot(fp.tau(), {fp.a, fp.gamma});
  return 2.0 * params.lambda * fp.a - 2.0 * (rho / fp.gamma) * overshoot;
}

double risk_f_derivative(double a, const ModelParams& params) {
  return risk_f_derivative(solve_fixed_point(a, params), params);
}

double minimize_risk(const ModelParams& params, const RiskMinimizerOptions& opts) {
  params.validate();
  const auto f = [&](double a) { return risk_f(a, params); };

  double hi = 1.0;
  double f_hi = f(hi);
  double f_half = f(0.5 * hi);
  int doublings = 0;
  while (!(f_hi > f_half)) {
    if (++doublings > opts.max_doublings) {
      throw BracketFailure("minimize_risk: f kept decreasing through a=" + std::to_string(hi));
    }
    hi *= 2.0;
    f_half = f_hi;
    f_hi = f(hi);
  }

  // Golden-section search on [0, hi].
  constexpr double kInvPhi = 0.61803398874989484820;
  double lo = 0.0;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > opts.golden_tol * std::max(1.0, hi)) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    }
  }

  // Golden-section resolution is limited by the flatness of f near its
  // minimum; finish on f' instead.
  const auto df = [&](double a) { return risk_f_derivative(a, params); };
  double d_lo = df(lo);
  double d_hi = df(hi);
  const double width = hi - lo;
  for (int widen = 0; widen < 20 && !(d_lo <= 0.0 && d_hi >= 0.0); ++widen) {
    if (d_lo > 0.0) {
      lo = std::max(0.0, lo - width * (1 << widen));
      d_lo = df(lo);
    }
    if (d_hi < 0.0) {
      hi += width * (1 << widen);
      d_hi = df(hi);
    }
  }
  if (!(d_lo <= 0.0 && d_hi >= 0.0)) {
    throw BracketFailure("minimize_risk: derivative does not change sign near the golden bracket");
  }
  const double a_star = bracketed_root(df, lo, hi, d_lo, d_hi, 200, "minimize_risk");
  if (!(a_star > 0.0)) throw BracketFailure("minimize_risk: minimizer is not positive");
  return a_star;
}

AsymptoticCharacterization characterize(const ModelParams& params) {
  params.validate();
  AsymptoticCharacterization c;
  c.a_star = minimize_risk(params);
  c.fp_star = solve_fixed_point(c.a_star, params);
  const double tau = c.fp_star.tau();
  const double delta = params.delta;
  c.alpha_bar = kSqrt2OverPi / (delta * tau);
  const auto k = kernels_closed_form(tau, {c.a_star, c.fp_star.gamma});
  c.beta_bar = (c.alpha_bar * c.alpha_bar * k.m2 - 2.0 * c.alpha_bar * k.mabs + 1.0) / delta;
  const double noise = c.beta_bar + params.sigma2;
  c.snr_bar = noise > 0.0 ? c.alpha_bar * c.alpha_bar / noise
                          : std::numeric_limits<double>::infinity();
  c.sep = sep_prediction(c.snr_bar);
  return c;
}

double sep_prediction(double snr_bar) {
  if (std::isinf(snr_bar)) return 0.0;
  return normal_tail(std::sqrt(snr_bar));
}

double sep_prediction(const AsymptoticCharacterization& c) { return sep_prediction(c.snr_bar); }

std::vector<double> se_trajectory(double a, double gamma, double delta, int iters) {
  std::vector<double> tau2(static_cast<std::size_t>(iters) + 1, 1.0);
  const DenoiserParams p{a, gamma};
  for (int t = 0; t < iters; ++t) {
    tau2[t + 1] = 1.0 + kernels_closed_form(std::sqrt(tau2[t]), p).m2 / delta;
  }
  return tau2;
}

double sigma2_from_snr_db(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

}  // namespace crq
