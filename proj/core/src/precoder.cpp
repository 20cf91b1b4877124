#include "crq/precoder.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

#include "crq/errors.hpp"

namespace crq {

namespace {

Vector clip(const Vector& v, double a) { return v.cwiseMax(-a).cwiseMin(a); }

// Unscaled gradient H^T (H x - s) + rho x; the true gradient is 2/N times this.
Vector half_gradient(const Matrix& H, const Vector& s, const Vector& x, double rho) {
  Vector g = H.transpose() * (H * x - s);
  g += rho * x;
  return g;
}

// max_{y in box} <grad, x - y> = <grad, x> + a ||grad||_1, in unscaled units.
double frank_wolfe_gap(const Vector& g, const Vector& x, double a) {
  return g.dot(x) + a * g.lpNorm<1>();
}

}  // namespace

double gram_spectral_norm(const Matrix& H) {
  const Matrix gram = H.rows() <= H.cols() ? Matrix(H * H.transpose()) : Matrix(H.transpose() * H);
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double inner_objective(const Matrix& H, const Vector& s, const Vector& x, double rho) {
  const double n = static_cast<double>(H.cols());
  return ((s - H * x).squaredNorm() + rho * x.squaredNorm()) / n;
}

double inner_kkt_residual(const Matrix& H, const Vector& s, const Vector& x, double a, double rho,
                          double lipschitz) {
  const double n = static_cast<double>(H.cols());
  if (!(lipschitz > 0.0)) lipschitz = 2.0 * (gram_spectral_norm(H) + rho) / n;
  // Step 1/L on the true gradient (2/N) g equals step 1/(lambda_max + rho) on g.
  const double step = 2.0 / (n * lipschitz);
  const Vector g = half_gradient(H, s, x, rho);
  return (x - clip(x - step * g, a)).norm() / std::sqrt(n);
}

InnerSolution solve_inner(const Matrix& H, const Vector& s, double a, double rho,
                          const InnerOptions& opts, const Vector* warm, double lipschitz) {
  const auto n = H.cols();
  if (H.rows() != s.size()) throw ConfigError("solve_inner: H rows and s length differ");
  if (a < 0.0 || rho < 0.0) throw ConfigError("solve_inner: a and rho must be nonnegative");
  const double nd = static_cast<double>(n);

  InnerSolution sol;
  if (a == 0.0) {
    sol.x = Vector::Zero(n);
    sol.objective = s.squaredNorm() / nd;
    return sol;
  }
  if (!(lipschitz > 0.0)) lipschitz = 2.0 * (gram_spectral_norm(H) + rho) / nd;
  const double step = 2.0 / (nd * lipschitz);

  Vector x = warm != nullptr && warm->size() == n ? clip(*warm, a) : Vector(Vector::Zero(n));
  Vector x_prev = x;
  Vector y = x;
  double momentum = 1.0;
  constexpr int kCheckEvery = 10;

  const auto converged = [&](const Vector& cand) {
    const Vector g = half_gradient(H, s, cand, rho);
    sol.kkt_residual = (cand - clip(cand - step * g, a)).norm() / std::sqrt(nd);
    sol.gap = std::max(0.0, 2.0 * frank_wolfe_gap(g, cand, a) / nd);
    return rho > 0.0 ? sol.kkt_residual < opts.tol : sol.gap < opts.tol;
  };

  for (int it = 1; it <= opts.max_iter; ++it) {
    const Vector g = half_gradient(H, s, y, rho);
    Vector x_next = clip(y - step * g, a);

    // Gradient-based adaptive restart.
    if ((y - x_next).dot(x_next - x) > 0.0) momentum = 1.0;
    const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    x_prev = std::move(x);
    x = std::move(x_next);
    y = x + ((momentum - 1.0) / next_momentum) * (x - x_prev);
    momentum = next_momentum;

    const double change = (x - x_prev).norm() / std::sqrt(nd);
    if ((change < opts.tol || it % kCheckEvery == 0) && converged(x)) {
      sol.iterations = it;
      sol.objective = inner_objective(H, s, x, rho);
      sol.x = std::move(x);
      return sol;
    }
  }
  throw NonConvergence("solve_inner: stationarity " + std::to_string(sol.kkt_residual) +
                       ", gap " + std::to_string(sol.gap) + " after " +
                       std::to_string(opts.max_iter) + " iterations");
}

PrecodeResult solve_crq(const Matrix& H, const Vector& s, const ModelParams& params,
                        const CrqOptions& opts) {
  if (H.rows() != s.size()) throw ConfigError("solve_crq: H rows and s length differ");
  if (!(params.lambda > 0.0)) throw ConfigError("solve_crq: lambda must be positive");
  const double rho = params.rho;
  const double lipschitz = 2.0 * (gram_spectral_norm(H) + rho) / static_cast<double>(H.cols());

  PrecodeResult out;
  Vector warm = Vector::Zero(H.cols());
  double best_a = 0.0;
  double best_g = std::numeric_limits<double>::infinity();
  Vector best_x = warm;

  const auto g = [&](double a) {
    InnerSolution sol = solve_inner(H, s, a, rho, opts.inner, &warm, lipschitz);
    ++out.outer_evals;
    out.inner_iters += sol.iterations;
    const double value = sol.objective + params.lambda * a * a;
    warm = sol.x;
    if (value < best_g) {
      best_g = value;
      best_a = a;
      best_x = std::move(sol.x);
    }
    return value;
  };

  double hi = 1.0;
  double g_hi = g(hi);
  double g_half = g(0.5 * hi);
  int doublings = 0;
  while (!(g_hi > g_half)) {
    if (++doublings > opts.max_doublings) {
      throw BracketFailure("solve_crq: g_N kept decreasing through a=" + std::to_string(hi));
    }
    hi *= 2.0;
    g_half = g_hi;
    g_hi = g(hi);
  }

  constexpr double kInvPhi = 0.61803398874989484820;
  double lo = 0.0;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double g1 = g(x1);
  double g2 = g(x2);
  while (hi - lo > opts.outer_tol) {
    if (g1 < g2) {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - kInvPhi * (hi - lo);
      g1 = g(x1);
    } else {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + kInvPhi * (hi - lo);
      g2 = g(x2);
    }
  }

  out.x_hat = std::move(best_x);
  out.a_hat = out.x_hat.lpNorm<Eigen::Infinity>();
  out.objective = best_g;
  if (std::abs(out.a_hat - best_a) > 1e-9 * std::max(1.0, best_a)) {
    throw NonConvergence("solve_crq: box constraint inactive at the optimum (a=" +
                         std::to_string(best_a) + ", ||x||_inf=" + std::to_string(out.a_hat) + ")");
  }
  out.x_t = quantize(out.x_hat);
  return out;
}

ModelParams squid_preset(int n, int k, double sigma2) {
  if (n <= 0 || k <= 0) throw ConfigError("squid_preset: N and K must be positive");
  if (!(sigma2 >= 0.0)) throw ConfigError("squid_preset: sigma2 must be nonnegative");
  const double lambda = sigma2 * static_cast<double>(k) / static_cast<double>(n);
  if (!(lambda > 0.0)) throw DegenerateLambda("squid_preset: lambda = sigma2 K / N is zero");
  ModelParams p;
  p.delta = static_cast<double>(k) / static_cast<double>(n);
  p.rho = 0.0;
  p.lambda = lambda;
  p.sigma2 = sigma2;
  p.squid = true;
  return p;
}

Vector quantize(const Vector& x_hat) {
  return x_hat.unaryExpr([](double v) { return v < 0.0 ? -1.0 : 1.0; });
}

}  // namespace crq
