#include "crq/mc_simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <thread>

#include "crq/amp_solver.hpp"
#include "crq/precoder.hpp"

namespace crq {

namespace {

constexpr double kZ95 = 1.959963984540054;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct Draw {
  Eigen::MatrixXd H;
  Eigen::VectorXd s;
  Eigen::VectorXd unit_noise;
};

Draw draw(int n, int k, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  Draw d;
  d.H.resize(k, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < k; ++i) d.H(i, j) = scale * gauss(gen);
  }
  d.s.resize(k);
  for (int i = 0; i < k; ++i) d.s[i] = (gen() >> 63) != 0 ? 1.0 : -1.0;
  d.unit_noise.resize(k);
  for (int i = 0; i < k; ++i) d.unit_noise[i] = gauss(gen);
  return d;
}

Eigen::VectorXd sign_of(const Eigen::VectorXd& v) {
  return v.unaryExpr([](double x) { return x < 0.0 ? -1.0 : 1.0; });
}

// Per-trial sufficient statistics at one noise level.
struct TrialStats {
  long long errors = 0;
  double sy = 0.0;  // sum s_k y_k
  double y2 = 0.0;  // sum y_k^2
  double e1 = 0.0;  // sums of powers of e_k = y_k - alpha_bar s_k
  double e2 = 0.0;
  double e3 = 0.0;
  long long agree = 0;
  double a_hat = 0.0;
};

struct TrialOutput {
  std::vector<TrialStats> per_level;
};

// Runs fn(i) for i in [0, count) on a small thread pool. The lowest failing
// index is rethrown as TrialError.
template <class Fn>
void parallel_trials(long long count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<long long>(threads, std::max(1LL, count)));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(count));
  std::atomic<long long> next{0};
  auto worker = [&] {
    for (long long i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        failures[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const std::exception& e) {
      throw TrialError(i, e.what());
    }
  }
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

// Standard error of the mean of per-trial values; trials are the independent units.
double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double central_m2(double e1, double e2, double count) {
  const double mu = e1 / count;
  return e2 / count - mu * mu;
}

double skew_from_sums(double e1, double e2, double e3, double count) {
  const double mu = e1 / count;
  const double m2 = e2 / count - mu * mu;
  const double m3 = e3 / count - 3.0 * mu * e2 / count + 2.0 * mu * mu * mu;
  return m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
}

McReport summarize(const std::vector<TrialOutput>& outputs, std::size_t level, int k,
                   const AsymptoticCharacterization& theory, std::uint64_t seed) {
  McReport r;
  r.trials = static_cast<long long>(outputs.size());
  r.users = k;
  r.theory = theory;
  r.seed = seed;
  const double kd = static_cast<double>(k);

  TrialStats total;
  std::vector<double> alpha_t, var_t, m2_t, skew_t;
  alpha_t.reserve(outputs.size());
  for (const auto& out : outputs) {
    const TrialStats& t = out.per_level[level];
    total.errors += t.errors;
    total.sy += t.sy;
    total.y2 += t.y2;
    total.e1 += t.e1;
    total.e2 += t.e2;
    total.e3 += t.e3;
    total.a_hat += t.a_hat;
    alpha_t.push_back(t.sy / kd);
    var_t.push_back(central_m2(t.e1, t.e2, kd));
    m2_t.push_back(t.y2 / kd);
    skew_t.push_back(skew_from_sums(t.e1, t.e2, t.e3, kd));
  }

  const double samples = static_cast<double>(r.trials) * kd;
  r.errors = total.errors;
  r.sep_hat = static_cast<double>(total.errors) / samples;
  r.sep_ci = total.errors == 0 ? 1.0 - std::pow(0.025, 1.0 / samples)
                               : kZ95 * std::sqrt(r.sep_hat * (1.0 - r.sep_hat) / samples);
  r.alpha_hat = total.sy / samples;
  r.alpha_se = stderr_of(alpha_t);
  r.var_hat = central_m2(total.e1, total.e2, samples);
  r.var_se = stderr_of(var_t);
  r.second_moment = total.y2 / samples;
  r.second_moment_se = stderr_of(m2_t);
  r.skewness = skew_from_sums(total.e1, total.e2, total.e3, samples);
  r.skewness_se = stderr_of(skew_t);
  r.mean_a_hat = total.a_hat / static_cast<double>(r.trials);
  return r;
}

}  // namespace

std::string to_string(SolverBackend b) {
  switch (b) {
    case SolverBackend::Convex: return "convex";
    case SolverBackend::Amp: return "amp";
    case SolverBackend::CrossCheck: return "cross-check";
  }
  return "convex";
}

SolverBackend parse_solver_backend(const std::string& name) {
  if (name == "convex") return SolverBackend::Convex;
  if (name == "amp") return SolverBackend::Amp;
  if (name == "cross-check") return SolverBackend::CrossCheck;
  throw ConfigError("unknown solver backend '" + name + "' (expected convex, amp, cross-check)");
}

ModelParams SystemConfig::model() const {
  if (squid) return squid_preset(n, k, sigma2);
  ModelParams p;
  p.delta = delta();
  p.rho = rho;
  p.lambda = lambda;
  p.sigma2 = sigma2;
  return p;
}

void SystemConfig::validate() const {
  if (n < 1 || k < 1) throw ConfigError("N and K must be at least 1");
  model().validate();
  if (solver != SolverBackend::Convex && !(model().rho > 0.0)) {
    throw ConfigError("the " + to_string(solver) + " backend needs rho > 0");
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

Instance generate_instance(const SystemConfig& config, std::uint64_t seed) {
  if (config.n < 1 || config.k < 1) throw ConfigError("N and K must be at least 1");
  Draw d = draw(config.n, config.k, seed);
  Instance inst;
  inst.H = std::move(d.H);
  inst.s = std::move(d.s);
  inst.noise = std::sqrt(config.sigma2) * d.unit_noise;
  inst.seed = seed;
  return inst;
}

Eigen::VectorXd detect(const Eigen::MatrixXd& H, const Eigen::VectorXd& x_t,
                       const Eigen::VectorXd& noise) {
  if (H.cols() != x_t.size() || H.rows() != noise.size()) {
    throw ConfigError("detect: dimension mismatch");
  }
  Eigen::VectorXd y = H * x_t;
  y += noise;
  return sign_of(y);
}

TrialError::TrialError(std::size_t trial, const std::string& what)
    : Error("trial " + std::to_string(trial) + ": " + what), trial_(trial) {}

double MomentRow::z_score() const { return (empirical - theory) / stderr_; }

std::vector<McReport> run_sep_curve(const SystemConfig& config, const std::vector<double>& sigma2s,
                                    long long trials, std::uint64_t seed,
                                    const MonteCarloOptions& opts) {
  config.validate();
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (sigma2s.empty()) throw ConfigError("run_sep_curve: no noise levels");
  if (config.squid && sigma2s.size() > 1) {
    throw ConfigError("run_sep_curve: the SQUID preset ties lambda to sigma2; run levels separately");
  }

  std::vector<AsymptoticCharacterization> theory;
  theory.reserve(sigma2s.size());
  for (double s2 : sigma2s) {
    SystemConfig c = config;
    c.sigma2 = s2;
    theory.push_back(characterize(c.model()));
  }
  const ModelParams model = config.model();
  const AsymptoticCharacterization& base = theory.front();
  const FixedPoint fp_star = base.fp_star;

  std::vector<TrialOutput> outputs(static_cast<std::size_t>(trials));
  parallel_trials(trials, opts.threads, [&](long long t) {
    const Draw d = draw(config.n, config.k, derive_seed(seed, static_cast<std::uint64_t>(t)));
    Eigen::VectorXd x_t;
    long long agree = 0;
    double a_hat = 0.0;
    AmpOptions amp_opts;
    amp_opts.onsager = OnsagerMode::StateEvolution;

    if (config.solver == SolverBackend::Amp) {
      const AmpResult amp = amp_run(d.H, d.s, base.a_star, fp_star, amp_opts);
      if (!amp.trace.converged) throw NonConvergence("AMP did not converge");
      x_t = quantize(amp.x);
      a_hat = amp.x.lpNorm<Eigen::Infinity>();
    } else {
      PrecodeResult pr = solve_crq(d.H, d.s, model);
      x_t = std::move(pr.x_t);
      a_hat = pr.a_hat;
      if (config.solver == SolverBackend::CrossCheck) {
        const FixedPoint fp = solve_fixed_point(pr.a_hat, model);
        const AmpResult amp = amp_run(d.H, d.s, pr.a_hat, fp, amp_opts);
        agree = (quantize(amp.x).array() == x_t.array()).count();
      }
    }

    const Eigen::VectorXd y = d.H * x_t;
    TrialOutput out;
    out.per_level.reserve(sigma2s.size());
    for (std::size_t j = 0; j < sigma2s.size(); ++j) {
      const Eigen::VectorXd noise = std::sqrt(sigma2s[j]) * d.unit_noise;
      Eigen::VectorXd received = y;
      received += noise;
      const Eigen::VectorXd s_hat = sign_of(received);
      TrialStats st;
      st.errors = (s_hat.array() != d.s.array()).count();
      const double alpha = theory[j].alpha_bar;
      for (int i = 0; i < config.k; ++i) {
        const double e = y[i] - alpha * d.s[i];
        st.sy += d.s[i] * y[i];
        st.y2 += y[i] * y[i];
        st.e1 += e;
        st.e2 += e * e;
        st.e3 += e * e * e;
      }
      st.agree = agree;
      st.a_hat = a_hat;
      out.per_level.push_back(st);
    }
    outputs[static_cast<std::size_t>(t)] = std::move(out);
  });

  std::vector<McReport> reports;
  reports.reserve(sigma2s.size());
  for (std::size_t j = 0; j < sigma2s.size(); ++j) {
    McReport r = summarize(outputs, j, config.k, theory[j], seed);
    if (config.solver == SolverBackend::CrossCheck) {
      long long agree = 0;
      for (const auto& o : outputs) agree += o.per_level[j].agree;  // trial order
      r.sign_agreement = static_cast<double>(agree) /
                         (static_cast<double>(trials) * static_cast<double>(config.n));
      if (r.sign_agreement < opts.min_sign_agreement) {
        throw CrossCheckMismatch("cross-check: AMP and convex x_T agree on " +
                                 std::to_string(r.sign_agreement) + " of coordinates");
      }
    } else {
      r.sign_agreement = std::numeric_limits<double>::quiet_NaN();
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

McReport run_sep_experiment(const SystemConfig& config, long long trials, std::uint64_t seed,
                            const MonteCarloOptions& opts) {
  return run_sep_curve(config, {config.sigma2}, trials, seed, opts).front();
}

std::vector<MomentRow> moment_rows(const McReport& r) {
  const double a = r.theory.alpha_bar;
  const double b = r.theory.beta_bar;
  return {
      {"mean s*y", r.alpha_hat, r.alpha_se, a},
      {"var(y - alpha*s)", r.var_hat, r.var_se, b},
      {"mean y^2", r.second_moment, r.second_moment_se, a * a + b},
      {"skew(y - alpha*s)", r.skewness, r.skewness_se, 0.0},
  };
}

std::vector<MomentRow> moment_check(const SystemConfig& config, long long trials,
                                    std::uint64_t seed, const MonteCarloOptions& opts) {
  return moment_rows(run_sep_experiment(config, trials, seed, opts));
}

std::vector<SweepRow> sweep(const std::vector<SystemConfig>& grid, long long trials,
                            std::uint64_t seed, bool theory_only, const MonteCarloOptions& opts) {
  if (grid.empty()) throw ConfigError("sweep: empty grid");
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (const auto& point : grid) {
    SweepRow row;
    row.config = point;
    try {
      point.validate();
      row.theory = characterize(point.model());
      if (!theory_only) row.sim = run_sep_experiment(point, trials, seed, opts);
    } catch (const Error& e) {
      row.status = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace crq
