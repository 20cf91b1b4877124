#include "crq/amp_solver.hpp"

#include <cmath>
#include <string>

#include "crq/errors.hpp"
#include "crq/scalar_core.hpp"

namespace crq {

AmpResult amp_run(const Eigen::MatrixXd& H, const Eigen::VectorXd& s, double a,
                  const FixedPoint& fp, const AmpOptions& opts) {
  const auto k = H.rows();
  const auto n = H.cols();
  if (s.size() != k) throw ConfigError("amp_run: H rows and s length differ");
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double delta = kd / nd;
  const DenoiserParams p{a, fp.gamma};
  const double knee = p.knee();
  const double slope = 1.0 / (1.0 + fp.gamma);
  const double se_onsager = kernels_closed_form(fp.tau(), p).d1 / delta;

  AmpResult res;
  res.x = Eigen::VectorXd::Zero(n);
  res.z = s;
  Eigen::VectorXd r(n);
  Eigen::VectorXd x_next(n);
  double onsager = 0.0;  // absent at t = 0

  for (int t = 0; t < opts.max_iter; ++t) {
    if (t > 0) {
      // z_t = s - H x_t + b_{t-1} z_{t-1}, with b from the previous denoising step.
      res.z = s - H * res.x + onsager * res.z;
    }
    AmpIterate rec;
    rec.tau2_hat = res.z.squaredNorm() / kd;
    rec.onsager = onsager;

    r.noalias() = H.transpose() * res.z;
    r += res.x;
    long interior = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      x_next[i] = denoise(r[i], p);
      interior += std::abs(r[i]) < knee ? 1 : 0;
    }
    onsager = opts.onsager == OnsagerMode::Empirical
                  ? slope * static_cast<double>(interior) / nd / delta
                  : se_onsager;

    rec.change = (x_next - res.x).squaredNorm() / nd;
    rec.x_energy = x_next.squaredNorm() / nd;
    res.x.swap(x_next);
    res.trace.records.push_back(rec);

    if (!(rec.x_energy <= 1e6)) {
      throw Divergence("amp_run: ||x||^2/N = " + std::to_string(rec.x_energy) + " at t=" +
                       std::to_string(t + 1));
    }
    if (rec.change < opts.tol) {
      res.trace.converged = true;
      break;
    }
  }
  // Leave z consistent with the returned x.
  res.z = s - H * res.x + onsager * res.z;
  return res;
}

std::vector<TauTraceRow> empirical_tau_trace(const AmpTrace& trace, const FixedPoint& fp,
                                             double delta) {
  const int iters = static_cast<int>(trace.records.size());
  const auto tau2 = se_trajectory(fp.a, fp.gamma, delta, iters);
  std::vector<TauTraceRow> rows;
  rows.reserve(trace.records.size());
  for (int t = 1; t <= iters; ++t) {
    TauTraceRow row;
    row.t = t;
    row.empirical = trace.records[t - 1].x_energy;
    row.predicted = delta * (tau2[t] - 1.0);
    row.deviation = std::abs(row.empirical - row.predicted);
    rows.push_back(row);
  }
  return rows;
}

double empirical_objective(const Eigen::MatrixXd& H, const Eigen::VectorXd& s,
                           const Eigen::VectorXd& x, double rho) {
  const double n = static_cast<double>(H.cols());
  return ((s - H * x).squaredNorm() + rho * x.squaredNorm()) / n;
}

}  // namespace crq
