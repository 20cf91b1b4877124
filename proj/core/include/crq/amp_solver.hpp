#pragma once

#include <vector>

#include <Eigen/Dense>

#include "crq/state_evolution.hpp"

namespace crq {

/// How the Onsager coefficient delta^-1 <eta'> multiplying z_{t-1} is formed.
enum class OnsagerMode {
  /// Average of eta' over the N current pre-denoising inputs.
  Empirical,
  /// The state-evolution value delta^-1 E[eta'(tau_a Z; gamma_a)] = 1 - rho / gamma_a,
  /// taken from the fixed point. With this coefficient every AMP fixed point
  /// satisfies the KKT conditions of the inner problem exactly at finite N.
  StateEvolution,
};

struct AmpOptions {
  int max_iter = 500;
  double tol = 1e-12;  ///< on ||x_{t+1} - x_t||^2 / N
  OnsagerMode onsager = OnsagerMode::Empirical;
};

struct AmpIterate {
  double x_energy = 0.0;  ///< ||x_t||^2 / N after the denoising step
  double tau2_hat = 0.0;  ///< ||z||^2 / K feeding that step
  double change = 0.0;    ///< ||x_t - x_{t-1}||^2 / N
  double onsager = 0.0;   ///< coefficient used to form the z feeding that step
};

struct AmpTrace {
  std::vector<AmpIterate> records;  ///< records[t-1] describes x_t
  bool converged = false;
};

struct AmpResult {
  Eigen::VectorXd x;
  Eigen::VectorXd z;
  AmpTrace trace;
};

/// AMP with the stationary box denoiser eta_a(.; gamma_a), starting from
/// x_0 = 0, z_0 = s with no Onsager term at t = 0:
///   x_{t+1} = eta_a(x_t + H^T z_t; gamma_a)
///   z_t     = s - H x_t + b_{t-1} z_{t-1}
/// delta is taken as K / N of H. Stops once ||x_{t+1} - x_t||^2 / N < tol.
/// Throws Divergence if ||x_t||^2 / N exceeds 1e6.
AmpResult amp_run(const Eigen::MatrixXd& H, const Eigen::VectorXd& s, double a,
                  const FixedPoint& fp, const AmpOptions& opts = {});

struct TauTraceRow {
  int t = 0;
  double empirical = 0.0;  ///< ||x_t||^2 / N
  double predicted = 0.0;  ///< delta (tau_t^2 - 1) from the state-evolution recursion
  double deviation = 0.0;
};

/// Compares the iterate energies of a run with the state-evolution recursion,
/// using E[eta_a^2(tau_{t-1} Z; gamma_a)] = delta (tau_t^2 - 1).
std::vector<TauTraceRow> empirical_tau_trace(const AmpTrace& trace, const FixedPoint& fp,
                                             double delta);

/// (1/N) ||s - H x||^2 + (rho/N) ||x||^2.
double empirical_objective(const Eigen::MatrixXd& H, const Eigen::VectorXd& s,
                           const Eigen::VectorXd& x, double rho);

}  // namespace crq
