#pragma once

#include <array>
#include <vector>

namespace crq {

/// Large-system model parameters.
struct ModelParams {
  double delta = 0.5;   ///< load ratio K / N
  double rho = 0.2;     ///< l2 regularizer; 0 selects the rho -> 0+ continuation
  double lambda = 0.2;  ///< box regularizer, > 0
  double sigma2 = 0.0;  ///< receiver noise variance
  bool squid = false;   ///< built by squid_preset()

  /// Stand-in for rho = 0 in the asymptotic analysis, which needs rho > 0.
  static constexpr double kContinuationRho = 1e-8;

  [[nodiscard]] double analysis_rho() const noexcept { return rho > 0.0 ? rho : kContinuationRho; }
  [[nodiscard]] bool continuation() const noexcept { return !(rho > 0.0); }

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
};

/// Solution (tau_a^2, gamma_a) of the coupled calibration equations at box level a:
///   tau^2 = 1 + E[eta_a^2(tau Z; gamma)] / delta
///   rho   = gamma (1 - E[eta_a'(tau Z; gamma)] / delta)
struct FixedPoint {
  double tau2 = 1.0;
  double gamma = 0.0;
  double a = 0.0;
  std::array<double, 2> residuals{};  ///< |tau equation|, |gamma equation|

  [[nodiscard]] double tau() const;
};

struct FixedPointOptions {
  double gamma_init = 1.0;  ///< initial upper bracket guess for gamma
  double tol = 1e-13;
  int max_iter = 400;
};

/// Residuals of both calibration equations at an arbitrary (tau^2, gamma).
std::array<double, 2> fixed_point_residuals(double tau2, double gamma, double a, double delta,
                                            double rho);

/// Solves for tau^2 at fixed (a, gamma): the unique root >= 1 of the concave
/// map tau^2 -> 1 + E[eta^2] / delta - tau^2.
double solve_tau2(double a, double gamma, double delta, double tol = 1e-14, int max_iter = 200);

/// Solves the calibration system at box level a >= 0. Uses params.analysis_rho().
FixedPoint solve_fixed_point(double a, const ModelParams& params, const FixedPointOptions& opts = {});

/// Asymptotic risk f(a) = delta rho (tau_a^2 - 1) + delta rho^2 tau_a^2 / gamma_a^2 + lambda a^2.
double risk_f(double a, const ModelParams& params);
double risk_f(const FixedPoint& fp, const ModelParams& params);

/// f'(a) = 2 lambda a - 2 (rho / gamma_a) E[(tau_a |Z| - a (1 + gamma_a))_+].
/// Envelope-theorem derivative: the box multipliers of the inner problem,
/// averaged in the large-system limit.
double risk_f_derivative(double a, const ModelParams& params);
double risk_f_derivative(const FixedPoint& fp, const ModelParams& params);

struct RiskMinimizerOptions {
  double golden_tol = 1e-7;  ///< relative width at which golden-section hands off
  double tol = 1e-12;        ///< final bracket width on a
  int max_doublings = 60;
};

/// a* = argmin_{a >= 0} f(a). Brackets by doubling from [0, 1], narrows with
/// golden-section search, then pins the root of f' inside the final bracket.
double minimize_risk(const ModelParams& params, const RiskMinimizerOptions& opts = {});

/// Everything the scalar "signal plus Gaussian noise" model needs.
struct AsymptoticCharacterization {
  double a_star = 0.0;
  FixedPoint fp_star;
  double alpha_bar = 0.0;
  double beta_bar = 0.0;
  double snr_bar = 0.0;
  double sep = 0.5;
};

AsymptoticCharacterization characterize(const ModelParams& params);

/// Q(sqrt(snr_bar)).
double sep_prediction(const AsymptoticCharacterization& c);
double sep_prediction(double snr_bar);

/// State-evolution trajectory tau_t^2, t = 0..iters, with tau_0^2 = 1 and
/// tau_{t+1}^2 = 1 + E[eta_a^2(tau_t Z; gamma)] / delta.
std::vector<double> se_trajectory(double a, double gamma, double delta, int iters);

/// Receiver noise variance for an SNR in dB, with unit-power symbols.
double sigma2_from_snr_db(double snr_db);

}  // namespace crq
