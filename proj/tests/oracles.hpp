#pragma once

// Reference computations used only by tests. Each one reaches its answer by a
// different route than the library code it checks: brute-force search,
// bisection, direct quadrature of a defining integral, dense linear algebra.

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace crq::oracle {

/// E[f(Z)], Z ~ N(0, 1), by composite Simpson on [-10, 10] with panels
/// split at every point in `kinks` (where f may be non-smooth).
double gauss_expect(const std::function<double(double)>& f, std::vector<double> kinks,
                    int intervals_per_panel = 1 << 12);

struct SearchedFixedPoint {
  double tau2 = 0.0;
  double gamma = 0.0;
};

/// (tau^2, gamma) from a log-spaced scan over gamma in [1e-6, 50] for the first
/// sign change of the gamma equation, refined by bisection; tau^2 at each gamma
/// comes from bisection of the tau equation over [1, 50]. Both equations are
/// evaluated with gauss_expect(), never with the closed-form kernels.
SearchedFixedPoint fixed_point_by_search(double a, double delta, double rho);

/// Minimizer of f over [lo, hi] from a uniform scan at `step` followed by
/// parabolic refinement through the best three samples, then golden section.
double argmin_by_scan(const std::function<double(double)>& f, double lo, double hi, double step);

/// min over [-a, a]^2 of (1/N)||s - H x||^2 + (rho/N)||x||^2 for N = 2 by
/// repeated grid zooming.
Eigen::Vector2d box_ridge_brute_force_2d(const Eigen::MatrixXd& H, const Eigen::VectorXd& s,
                                         double a, double rho);

/// (H^T H + rho I)^{-1} H^T s by dense Cholesky.
Eigen::VectorXd ridge_normal_equations(const Eigen::MatrixXd& H, const Eigen::VectorXd& s,
                                       double rho);

/// Best value of (1/N)||s - Hx||^2 + (rho/N)||x||^2 + lambda ||x||_inf^2 from
/// multi-start subgradient descent.
double linf_sq_multistart(const Eigen::MatrixXd& H, const Eigen::VectorXd& s, double rho,
                          double lambda, int starts, std::uint64_t seed);

}  // namespace crq::oracle
