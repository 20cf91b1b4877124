#pragma once

namespace crq {

/// Parameters of the box denoiser eta_a(x; gamma) = clamp(x / (1 + gamma), -a, a).
struct DenoiserParams {
  double a = 0.0;      ///< box level, a >= 0
  double gamma = 0.0;  ///< dual variable, gamma > 0 (0 allowed in kernel oracles)

  /// Input magnitude at which the denoiser starts clipping: a (1 + gamma).
  [[nodiscard]] double knee() const noexcept { return a * (1.0 + gamma); }
};

/// Expectations of the denoiser over Z ~ N(0, 1) evaluated at tau * Z.
struct GaussianKernelResult {
  double m2 = 0.0;    ///< E[eta^2(tau Z)]
  double d1 = 0.0;    ///< E[eta'(tau Z)]
  double mabs = 0.0;  ///< E[|eta(tau Z)|]
};

double denoise(double x, const DenoiserParams& p) noexcept;

/// Almost-everywhere derivative of denoise(). Zero on the kink |x| = a (1 + gamma).
double denoise_deriv(double x, const DenoiserParams& p) noexcept;

/// Closed-form Gaussian expectations in terms of the normal CDF/PDF at the
/// clipping threshold b = a (1 + gamma) / tau.
GaussianKernelResult kernels_closed_form(double tau, const DenoiserParams& p);

/// Direct numerical integration of the same expectations with composite
/// Simpson on [0, 10] (the integrands are even), split at the kink so each
/// panel integrates a smooth function. Serves as the reference for
/// kernels_closed_form().
GaussianKernelResult kernels_quadrature(double tau, const DenoiserParams& p);

/// E[(tau |Z| - a (1 + gamma))_+], the mean overshoot of the clipped inputs.
/// Drives the derivative of the asymptotic risk in the box level.
double clipped_overshoot(double tau, const DenoiserParams& p);

/// d E[eta^2(tau Z)] / d(tau^2) = E[Z^2; |Z| < b] / (1 + gamma)^2.
double m2_slope_in_tau2(double tau, const DenoiserParams& p);

}  // namespace crq
