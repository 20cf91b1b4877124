#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace crq::oracle {

namespace {

double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846); }

double clamp_box(double x, double a, double gamma) { return std::clamp(x / (1.0 + gamma), -a, a); }

double tau_equation(double tau2, double a, double gamma, double delta) {
  const double tau = std::sqrt(tau2);
  const double knee = a * (1.0 + gamma) / tau;
  const double m2 = gauss_expect(
      [&](double z) {
        const double e = clamp_box(tau * z, a, gamma);
        return e * e;
      },
      {-knee, knee}, 1 << 11);
  return 1.0 + m2 / delta - tau2;
}

double tau2_by_bisection(double a, double gamma, double delta) {
  double lo = 1.0;
  double hi = 50.0;
  if (tau_equation(lo, a, gamma, delta) <= 0.0) return lo;
  while (tau_equation(hi, a, gamma, delta) > 0.0) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (tau_equation(mid, a, gamma, delta) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double gamma_equation(double gamma, double a, double delta, double rho) {
  const double tau = std::sqrt(tau2_by_bisection(a, gamma, delta));
  const double knee = a * (1.0 + gamma) / tau;
  const double d1 = gauss_expect(
      [&](double z) { return std::abs(tau * z) < a * (1.0 + gamma) ? 1.0 / (1.0 + gamma) : 0.0; },
      {-knee, knee}, 1 << 11);
  return gamma * (1.0 - d1 / delta) - rho;
}

}  // namespace

double gauss_expect(const std::function<double(double)>& f, std::vector<double> kinks,
                    int intervals_per_panel) {
  constexpr double kCut = 10.0;
  std::vector<double> edges{-kCut, kCut};
  for (double k : kinks) {
    if (k > -kCut && k < kCut) edges.push_back(k);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  double total = 0.0;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double lo = edges[p];
    const double hi = edges[p + 1];
    if (!(hi > lo)) continue;
    const int n = intervals_per_panel;
    const double h = (hi - lo) / n;
    // Evaluate just inside the panel ends so that discontinuous integrands
    // take their one-sided values.
    const double eps = 1e-13 * std::max(1.0, std::abs(lo) + std::abs(hi));
    auto g = [&](int i) {
      double z = lo + i * h;
      if (i == 0) z += eps;
      if (i == n) z -= eps;
      return f(z) * phi(z);
    };
    double acc = g(0) + g(n);
    for (int i = 1; i < n; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * g(i);
    total += acc * h / 3.0;
  }
  return total;
}

SearchedFixedPoint fixed_point_by_search(double a, double delta, double rho) {
  // Log-spaced scan for the first sign change in gamma.
  double prev_g = 1e-6;
  double prev_r = gamma_equation(prev_g, a, delta, rho);
  double lo = 0.0;
  double hi = 0.0;
  bool found = prev_r >= 0.0;
  if (found) {
    lo = 0.0;
    hi = prev_g;
  }
  constexpr int kGrid = 80;
  for (int i = 1; i <= kGrid && !found; ++i) {
    const double g = 1e-6 * std::pow(50.0 / 1e-6, static_cast<double>(i) / kGrid);
    const double r = gamma_equation(g, a, delta, rho);
    if (prev_r < 0.0 && r >= 0.0) {
      lo = prev_g;
      hi = g;
      found = true;
    }
    prev_g = g;
    prev_r = r;
  }
  if (!found) throw std::runtime_error("fixed_point_by_search: no sign change for gamma in (0, 50]");
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (gamma_equation(mid, a, delta, rho) < 0.0 ? lo : hi) = mid;
  }
  SearchedFixedPoint fp;
  fp.gamma = 0.5 * (lo + hi);
  fp.tau2 = tau2_by_bisection(a, fp.gamma, delta);
  return fp;
}

double argmin_by_scan(const std::function<double(double)>& f, double lo, double hi, double step) {
  const auto count = static_cast<long>(std::floor((hi - lo) / step));
  long best = 0;
  double best_v = f(lo);
  for (long i = 1; i <= count; ++i) {
    const double v = f(lo + i * step);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  double l = lo + std::max(0L, best - 1) * step;
  double u = lo + std::min(count, best + 1) * step;
  // Golden section inside the winning cell pair.
  constexpr double kInvPhi = 0.61803398874989484820;
  double x1 = u - kInvPhi * (u - l);
  double x2 = l + kInvPhi * (u - l);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < 200 && u - l > 1e-13; ++i) {
    if (f1 < f2) {
      u = x2;
      x2 = x1;
      f2 = f1;
      x1 = u - kInvPhi * (u - l);
      f1 = f(x1);
    } else {
      l = x1;
      x1 = x2;
      f1 = f2;
      x2 = l + kInvPhi * (u - l);
      f2 = f(x2);
    }
  }
  return 0.5 * (l + u);
}

Eigen::Vector2d box_ridge_brute_force_2d(const Eigen::MatrixXd& H, const Eigen::VectorXd& s,
                                         double a, double rho) {
  if (H.cols() != 2) throw std::invalid_argument("box_ridge_brute_force_2d: N must be 2");
  const auto obj = [&](const Eigen::Vector2d& x) {
    return ((s - H * x).squaredNorm() + rho * x.squaredNorm()) / 2.0;
  };
  Eigen::Vector2d center(0.0, 0.0);
  double half = a;
  constexpr int kPts = 101;
  Eigen::Vector2d best = center;
  while (half > 1e-12) {
    double best_v = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kPts; ++i) {
      for (int j = 0; j < kPts; ++j) {
        Eigen::Vector2d x(center[0] - half + 2.0 * half * i / (kPts - 1),
                          center[1] - half + 2.0 * half * j / (kPts - 1));
        x = x.cwiseMax(-a).cwiseMin(a);
        const double v = obj(x);
        if (v < best_v) {
          best_v = v;
          best = x;
        }
      }
    }
    center = best;
    half *= 0.1;
  }
  return best;
}

Eigen::VectorXd ridge_normal_equations(const Eigen::MatrixXd& H, const Eigen::VectorXd& s,
                                       double rho) {
  const Eigen::MatrixXd A =
      H.transpose() * H + rho * Eigen::MatrixXd::Identity(H.cols(), H.cols());
  return A.llt().solve(H.transpose() * s);
}

double linf_sq_multistart(const Eigen::MatrixXd& H, const Eigen::VectorXd& s, double rho,
                          double lambda, int starts, std::uint64_t seed) {
  const double n = static_cast<double>(H.cols());
  const auto obj = [&](const Eigen::VectorXd& x) {
    const double linf = x.lpNorm<Eigen::Infinity>();
    return ((s - H * x).squaredNorm() + rho * x.squaredNorm()) / n + lambda * linf * linf;
  };
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < starts; ++r) {
    Eigen::VectorXd x(H.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = u(gen);
    for (int it = 0; it < 40000; ++it) {
      Eigen::VectorXd g = 2.0 * (H.transpose() * (H * x - s) + rho * x) / n;
      Eigen::Index arg = 0;
      const double linf = x.cwiseAbs().maxCoeff(&arg);
      if (linf > 0.0) g[arg] += 2.0 * lambda * linf * (x[arg] < 0.0 ? -1.0 : 1.0);
      x -= (0.5 / std::sqrt(1.0 + it)) * g;
      best = std::min(best, obj(x));
    }
  }
  return best;
}

}  // namespace crq::oracle
