#include "crq/scalar_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crq/normal.hpp"

namespace crq {

namespace {

// Truncation point and panel resolution for the quadrature reference.
constexpr double kQuadCutoff = 10.0;
constexpr int kQuadIntervals = 1 << 14;

// Composite Simpson of f over [lo, hi] with an even number of intervals.
template <class F>
double simpson(F&& f, double lo, double hi, int intervals) {
  if (!(hi > lo)) return 0.0;
  const double h = (hi - lo) / intervals;
  double odd = 0.0;
  double even = 0.0;
  for (int i = 1; i < intervals; ++i) {
    const double v = f(lo + i * h);
    (i % 2 == 1 ? odd : even) += v;
  }
  return h / 3.0 * (f(lo) + 4.0 * odd + 2.0 * even + f(hi));
}

// Threshold b = a (1 + gamma) / tau in standard-normal units.
double threshold(double tau, const DenoiserParams& p) { return p.knee() / tau; }

}  // namespace

double denoise(double x, const DenoiserParams& p) noexcept {
  return std::clamp(x / (1.0 + p.gamma), -p.a, p.a);
}

double denoise_deriv(double x, const DenoiserParams& p) noexcept {
  return std::abs(x) < p.knee() ? 1.0 / (1.0 + p.gamma) : 0.0;
}

GaussianKernelResult kernels_closed_form(double tau, const DenoiserParams& p) {
  if (p.a <= 0.0) return {};
  const double b = threshold(tau, p);
  const double scale = tau / (1.0 + p.gamma);
  const double central = normal_central_mass(b);  // P(|Z| < b)
  const double outside = 2.0 * normal_tail(b);     // P(|Z| >= b)
  const double pdf_b = normal_pdf(b);

  GaussianKernelResult r;
  // E[Z^2; |Z| < b] = P(|Z| < b) - 2 b phi(b)
  r.m2 = scale * scale * (central - 2.0 * b * pdf_b) + p.a * p.a * outside;
  r.d1 = central / (1.0 + p.gamma);
  // E[|Z|; |Z| < b] = 2 (phi(0) - phi(b))
  r.mabs = scale * 2.0 * (kInvSqrt2Pi - pdf_b) + p.a * outside;
  return r;
}

GaussianKernelResult kernels_quadrature(double tau, const DenoiserParams& p) {
  if (p.a <= 0.0) return {};
  const double b = threshold(tau, p);
  const double scale = tau / (1.0 + p.gamma);

  // Integrands are even in z, so integrate over [0, c] and double.
  const double inner_hi = std::min(b, kQuadCutoff);
  auto linear_sq = [&](double z) { return scale * scale * z * z * normal_pdf(z); };
  auto linear_abs = [&](double z) { return scale * z * normal_pdf(z); };

  double m2 = simpson(linear_sq, 0.0, inner_hi, kQuadIntervals);
  double mabs = simpson(linear_abs, 0.0, inner_hi, kQuadIntervals);
  const double mass = simpson(normal_pdf, 0.0, inner_hi, kQuadIntervals);
  if (b < kQuadCutoff) {
    const double tail = simpson(normal_pdf, b, kQuadCutoff, kQuadIntervals);
    m2 += p.a * p.a * tail;
    mabs += p.a * tail;
  }

  GaussianKernelResult r;
  r.m2 = 2.0 * m2;
  r.d1 = 2.0 * mass / (1.0 + p.gamma);
  r.mabs = 2.0 * mabs;
  return r;
}

double clipped_overshoot(double tau, const DenoiserParams& p) {
  const double c = p.knee();
  if (c <= 0.0) return tau * kSqrt2OverPi;
  const double b = c / tau;
  return 2.0 * (tau * normal_pdf(b) - c * normal_tail(b));
}

double m2_slope_in_tau2(double tau, const DenoiserParams& p) {
  if (p.a <= 0.0) return 0.0;
  const double b = threshold(tau, p);
  const double g1 = 1.0 + p.gamma;
  return (normal_central_mass(b) - 2.0 * b * normal_pdf(b)) / (g1 * g1);
}

}  // namespace crq
