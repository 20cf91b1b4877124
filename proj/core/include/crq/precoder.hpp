#pragma once

#include <Eigen/Dense>

#include "crq/state_evolution.hpp"

namespace crq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct InnerOptions {
  double tol = 1e-10;  ///< stationarity (rho > 0) or duality-gap (rho = 0) target
  int max_iter = 20000;
};

/// Solution of the inner box-constrained ridge problem
///   f_N(a) = min_{x in [-a, a]^N} (1/N) ||s - H x||^2 + (rho/N) ||x||^2.
struct InnerSolution {
  Vector x;
  double objective = 0.0;
  double kkt_residual = 0.0;  ///< ||x - P(x - grad / L)|| / sqrt(N)
  double gap = 0.0;           ///< Frank-Wolfe duality gap, an upper bound on objective suboptimality
  int iterations = 0;
};

/// Largest eigenvalue of H^T H, from a dense symmetric eigensolve of the
/// smaller of H H^T and H^T H.
double gram_spectral_norm(const Matrix& H);

/// Accelerated projected gradient (FISTA with gradient restart) at fixed step
/// 1/L, L = 2 (lambda_max(H^T H) + rho) / N. With rho > 0 the problem is
/// strongly convex and convergence is declared on the stationarity residual;
/// with rho = 0 on the duality gap. `warm` may be of any magnitude: it is
/// clipped into the box first.
InnerSolution solve_inner(const Matrix& H, const Vector& s, double a, double rho,
                          const InnerOptions& opts = {}, const Vector* warm = nullptr,
                          double lipschitz = 0.0);

/// (1/N) ||s - H x||^2 + (rho/N) ||x||^2.
double inner_objective(const Matrix& H, const Vector& s, const Vector& x, double rho);

/// Stationarity residual of x for the inner problem at box level a.
double inner_kkt_residual(const Matrix& H, const Vector& s, const Vector& x, double a, double rho,
                          double lipschitz);

struct CrqOptions {
  InnerOptions inner;
  double outer_tol = 1e-9;  ///< absolute width of the final golden-section bracket on a
  int max_doublings = 60;
};

struct PrecodeResult {
  Vector x_hat;
  double a_hat = 0.0;  ///< ||x_hat||_inf
  Vector x_t;          ///< sgn(x_hat), entries +-1
  double objective = 0.0;  ///< f_N(a_hat) + lambda a_hat^2
  int inner_iters = 0;
  int outer_evals = 0;
};

/// CRQ precoding: minimizes g_N(a) = f_N(a) + lambda a^2 over a >= 0 by
/// bracket expansion and golden-section search (g_N is convex), warm-starting
/// each inner solve from the previous one, then quantizes. rho is used as-is,
/// including rho = 0.
PrecodeResult solve_crq(const Matrix& H, const Vector& s, const ModelParams& params,
                        const CrqOptions& opts = {});

/// rho = 0, lambda = sigma2 K / N.
ModelParams squid_preset(int n, int k, double sigma2);

/// Element-wise sign with sgn(0) = +1.
Vector quantize(const Vector& x_hat);

}  // namespace crq
