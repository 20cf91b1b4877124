#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crq/errors.hpp"
#include "crq/state_evolution.hpp"

namespace crq {

enum class SolverBackend {
  Convex,      ///< nested projected-gradient CRQ solve
  Amp,         ///< AMP at the asymptotic optimum (a*, gamma*)
  CrossCheck,  ///< convex solve, then AMP at the same box level; signs must agree
};

std::string to_string(SolverBackend b);
SolverBackend parse_solver_backend(const std::string& name);

/// One finite-size experiment point.
struct SystemConfig {
  int n = 128;  ///< transmit antennas N
  int k = 64;   ///< users K
  double sigma2 = 1.0;
  double rho = 0.2;
  double lambda = 0.2;
  bool squid = false;  ///< lambda := sigma2 K / N and rho := 0
  SolverBackend solver = SolverBackend::Convex;

  [[nodiscard]] double delta() const { return static_cast<double>(k) / static_cast<double>(n); }
  /// Asymptotic parameters for this point (applies the SQUID preset if set).
  [[nodiscard]] ModelParams model() const;
  void validate() const;
};

/// Independent per-trial seed from a master seed and a trial index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

struct Instance {
  Eigen::MatrixXd H;      ///< K x N, i.i.d. N(0, 1/K)
  Eigen::VectorXd s;      ///< K, i.i.d. uniform +-1
  Eigen::VectorXd noise;  ///< K, i.i.d. N(0, sigma2)
  std::uint64_t seed = 0;
};

/// Draws H, then s, then unit Gaussian noise scaled by sqrt(sigma2), all from
/// one 64-bit Mersenne Twister seeded with `seed`.
Instance generate_instance(const SystemConfig& config, std::uint64_t seed);

/// sgn(H x_T + n), sgn(0) = +1.
Eigen::VectorXd detect(const Eigen::MatrixXd& H, const Eigen::VectorXd& x_t,
                       const Eigen::VectorXd& noise);

/// A solver failure inside a Monte Carlo trial.
class TrialError : public Error {
public:
  TrialError(std::size_t trial, const std::string& what);
  [[nodiscard]] std::size_t trial() const noexcept { return trial_; }

private:
  std::size_t trial_;
};

/// Cross-check mode found too many sign disagreements between the solvers.
class CrossCheckMismatch : public Error {
public:
  using Error::Error;
};

struct McReport {
  double sep_hat = 0.0;
  double sep_ci = 0.0;  ///< 95% half-width; Clopper-Pearson upper bound when errors == 0
  long long errors = 0;
  long long trials = 0;
  long long users = 0;  ///< K

  double alpha_hat = 0.0;  ///< mean of s_k h_k^T x_T
  double alpha_se = 0.0;
  double var_hat = 0.0;  ///< variance of h_k^T x_T - alpha_bar s_k
  double var_se = 0.0;
  double second_moment = 0.0;  ///< mean of (h_k^T x_T)^2
  double second_moment_se = 0.0;
  double skewness = 0.0;  ///< of h_k^T x_T - alpha_bar s_k
  double skewness_se = 0.0;

  double sign_agreement = 1.0;  ///< cross-check only: fraction of matching x_T entries
  double mean_a_hat = 0.0;      ///< average box level over trials

  AsymptoticCharacterization theory;
  std::uint64_t seed = 0;
};

struct MonteCarloOptions {
  unsigned threads = 0;  ///< 0: hardware concurrency
  double min_sign_agreement = 0.999;
};

/// End-to-end precode, transmit, detect over `trials` independent instances.
McReport run_sep_experiment(const SystemConfig& config, long long trials, std::uint64_t seed,
                            const MonteCarloOptions& opts = {});

/// Same as run_sep_experiment() at each noise level, sharing one precoding
/// per trial (the precoder does not depend on sigma2 unless SQUID is set).
/// Entry i is bit-identical to run_sep_experiment() with sigma2 = sigma2s[i].
std::vector<McReport> run_sep_curve(const SystemConfig& config, const std::vector<double>& sigma2s,
                                    long long trials, std::uint64_t seed,
                                    const MonteCarloOptions& opts = {});

struct MomentRow {
  std::string name;
  double empirical = 0.0;
  double stderr_ = 0.0;
  double theory = 0.0;
  [[nodiscard]] double z_score() const;
};

/// Pseudo-Lipschitz statistics of (h_k^T x_T, s_k) against the scalar model.
std::vector<MomentRow> moment_check(const SystemConfig& config, long long trials,
                                    std::uint64_t seed, const MonteCarloOptions& opts = {});
std::vector<MomentRow> moment_rows(const McReport& report);

struct SweepRow {
  SystemConfig config;
  std::string status = "ok";  ///< "ok" or the failure message
  std::optional<AsymptoticCharacterization> theory;
  std::optional<McReport> sim;
};

/// Theory (and, unless theory_only, simulation) at every grid point. Every
/// point reuses the master seed, so points share random instances. A failing
/// point is recorded and the sweep continues.
std::vector<SweepRow> sweep(const std::vector<SystemConfig>& grid, long long trials,
                            std::uint64_t seed, bool theory_only,
                            const MonteCarloOptions& opts = {});

}  // namespace crq
