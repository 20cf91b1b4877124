#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "crq/errors.hpp"
#include "crq/normal.hpp"
#include "crq/scalar_core.hpp"
#include "crq/state_evolution.hpp"
#include "oracles.hpp"

using namespace crq;

namespace {

ModelParams params(double delta, double rho, double lambda, double sigma2 = 0.0) {
  ModelParams p;
  p.delta = delta;
  p.rho = rho;
  p.lambda = lambda;
  p.sigma2 = sigma2;
  return p;
}

}  // namespace

TEST(FixedPoint, ZeroBox) {
  const auto fp = solve_fixed_point(0.0, params(0.5, 0.2, 0.3));
  EXPECT_DOUBLE_EQ(fp.tau2, 1.0);
  EXPECT_NEAR(fp.gamma, 0.2, 1e-14);
}

TEST(FixedPoint, MatchesSearchOracle) {
  const auto fp = solve_fixed_point(0.8, params(0.5, 0.2, 0.3));
  const auto ref = oracle::fixed_point_by_search(0.8, 0.5, 0.2);
  EXPECT_NEAR(fp.tau2, ref.tau2, 1e-8);
  EXPECT_NEAR(fp.gamma, ref.gamma, 1e-8);
  EXPECT_LT(fp.residuals[0], 1e-10);
  EXPECT_LT(fp.residuals[1], 1e-10);
}

TEST(FixedPoint, IndependentOfStartingBracket) {
  const auto p = params(0.5, 0.2, 0.3);
  const auto base = solve_fixed_point(0.8, p);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> init(-6.0, 4.0);
  for (int i = 0; i < 10; ++i) {
    FixedPointOptions opts;
    opts.gamma_init = std::pow(10.0, init(gen));
    const auto fp = solve_fixed_point(0.8, p, opts);
    EXPECT_NEAR(fp.tau2, base.tau2, 1e-9);
    EXPECT_NEAR(fp.gamma, base.gamma, 1e-9);
  }
}

TEST(FixedPoint, ResidualsAndTauBoundOnRandomConfigs) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> a(0.0, 5.0);
  std::uniform_real_distribution<double> logu(-3.0, 1.0);
  std::uniform_real_distribution<double> delta(0.05, 4.0);
  for (int i = 0; i < 300; ++i) {
    const auto p = params(delta(gen), std::pow(10.0, logu(gen)), 0.2);
    const double box = a(gen);
    const auto fp = solve_fixed_point(box, p);
    const auto res = fixed_point_residuals(fp.tau2, fp.gamma, box, p.delta, p.rho);
    ASSERT_LT(res[0], 1e-10);
    ASSERT_LT(res[1], 1e-10);
    ASSERT_GE(fp.tau2, 1.0);
    ASSERT_GT(fp.gamma, 0.0);
  }
}

TEST(FixedPoint, RejectsNegativeBoxAndReportsNonConvergence) {
  EXPECT_THROW(solve_fixed_point(-0.1, params(0.5, 0.2, 0.3)), ConfigError);
  FixedPointOptions opts;
  opts.max_iter = 1;
  EXPECT_THROW(solve_fixed_point(0.8, params(0.5, 0.2, 0.3), opts), NonConvergence);
}

TEST(Risk, ValueAtZeroIsDelta) {
  EXPECT_NEAR(risk_f(0.0, params(0.5, 0.2, 0.3)), 0.5, 1e-14);
  EXPECT_NEAR(risk_f(0.0, params(1.7, 0.05, 2.0)), 1.7, 1e-13);
}

TEST(Risk, MatchesOracleComposition) {
  const auto p = params(0.5, 0.2, 0.3);
  const auto ref = oracle::fixed_point_by_search(1.0, p.delta, p.rho);
  const double expected = p.delta * p.rho * (ref.tau2 - 1.0) +
                          p.delta * p.rho * p.rho * ref.tau2 / (ref.gamma * ref.gamma) +
                          p.lambda * 1.0;
  EXPECT_NEAR(risk_f(1.0, p), expected, 1e-9);
}

TEST(Risk, MidpointConvexity) {
  const auto p = params(0.5, 0.2, 0.3);
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> a(0.0, 4.0);
  for (int i = 0; i < 200; ++i) {
    const double a1 = a(gen);
    const double a2 = a(gen);
    EXPECT_LE(risk_f(0.5 * (a1 + a2), p), 0.5 * (risk_f(a1, p) + risk_f(a2, p)) + 1e-12);
  }
}

TEST(Risk, DerivativeMatchesCentralDifference) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> a(0.05, 3.0);
  std::uniform_real_distribution<double> rho(0.01, 2.0);
  std::uniform_real_distribution<double> delta(0.1, 3.0);
  std::uniform_real_distribution<double> lambda(0.01, 2.0);
  constexpr double h = 1e-5;
  for (int i = 0; i < 50; ++i) {
    const auto p = params(delta(gen), rho(gen), lambda(gen));
    const double x = a(gen);
    const double fd = (risk_f(x + h, p) - risk_f(x - h, p)) / (2.0 * h);
    EXPECT_NEAR(risk_f_derivative(x, p), fd, 1e-7 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Risk, ConvexOnDenseGrid) {
  const auto p = params(0.5, 0.2, 0.2);
  std::vector<double> f;
  for (int i = 0; i < 500; ++i) f.push_back(risk_f(3.0 * i / 499.0, p));
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    EXPECT_GE(f[i - 1] - 2.0 * f[i] + f[i + 1], -1e-8) << i;
  }
}

TEST(MinimizeRisk, MatchesScanOracleAndIsStationary) {
  const auto p = params(0.5, 0.2, 0.2);
  const double a_star = minimize_risk(p);
  const double scan = oracle::argmin_by_scan([&](double a) { return risk_f(a, p); }, 0.0, 2.0, 1e-4);
  EXPECT_NEAR(a_star, scan, 1e-6);
  const double h = 1e-4;
  EXPECT_LT(std::abs((risk_f(a_star + h, p) - risk_f(a_star - h, p)) / (2.0 * h)), 1e-5);
  EXPECT_LT(std::abs(risk_f_derivative(a_star, p)), 1e-12);
}

TEST(MinimizeRisk, HeavierBoxPenaltyShrinksBox) {
  const auto p = params(0.5, 0.2, 0.2);
  auto q = p;
  q.lambda = 2.0 * p.lambda;
  const double a1 = minimize_risk(p);
  const double a2 = minimize_risk(q);
  const double scan2 = oracle::argmin_by_scan([&](double a) { return risk_f(a, q); }, 0.0, 2.0, 1e-3);
  EXPECT_NEAR(a2, scan2, 1e-6);
  EXPECT_LT(a2, a1);
}

TEST(MinimizeRisk, PositiveOnRandomParams) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> logu(-2.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    const auto p = params(std::pow(10.0, logu(gen)), std::pow(10.0, logu(gen)),
                          std::pow(10.0, logu(gen)));
    const double a = minimize_risk(p);
    EXPECT_GT(a, 0.0);
    EXPECT_LT(std::abs(risk_f_derivative(a, p)), 1e-9);
  }
}

TEST(MinimizeRisk, BracketFailureWhenDoublingsExhausted) {
  RiskMinimizerOptions opts;
  opts.max_doublings = 0;
  EXPECT_THROW(minimize_risk(params(0.5, 0.2, 1e-12), opts), BracketFailure);
}

TEST(Characterize, BetaExpansionMatchesDirectQuadrature) {
  const auto p = params(0.5, 0.2, 0.2, 0.1);
  const auto c = characterize(p);
  const double tau = c.fp_star.tau();
  const DenoiserParams dp{c.a_star, c.fp_star.gamma};
  const double knee = dp.knee() / tau;
  const double direct =
      oracle::gauss_expect(
          [&](double z) {
            const double v = c.alpha_bar * std::abs(denoise(tau * z, dp)) - 1.0;
            return v * v;
          },
          {-knee, 0.0, knee}, 1 << 14) /
      p.delta;
  EXPECT_NEAR(c.beta_bar, direct, 1e-10);
  EXPECT_NEAR(c.alpha_bar, std::sqrt(2.0 / kPi) / (p.delta * tau), 1e-15);
  EXPECT_NEAR(c.snr_bar, c.alpha_bar * c.alpha_bar / (c.beta_bar + p.sigma2), 1e-14);
  EXPECT_NEAR(c.sep, normal_tail(std::sqrt(c.snr_bar)), 1e-16);
}

TEST(Characterize, NoiselessReduction) {
  const auto c = characterize(params(0.5, 0.2, 0.2, 0.0));
  EXPECT_DOUBLE_EQ(c.snr_bar, c.alpha_bar * c.alpha_bar / c.beta_bar);
}

TEST(Characterize, TunedLambdaBeatsSquidAtFiveDb) {
  const double sigma2 = sigma2_from_snr_db(5.0);
  const auto tuned = characterize(params(0.5, 0.0, 0.31, sigma2));
  const auto squid = characterize(params(0.5, 0.0, sigma2 * 0.5, sigma2));
  EXPECT_LT(tuned.sep, squid.sep);
}

TEST(Characterize, SepNonincreasingAsNoiseDrops) {
  double prev = 1.0;
  for (double s2 = 4.0; s2 >= 1e-4; s2 *= 0.5) {
    const double sep = characterize(params(0.5, 0.2, 0.2, s2)).sep;
    EXPECT_LE(sep, prev);
    prev = sep;
  }
}

TEST(SepPrediction, Examples) {
  EXPECT_EQ(sep_prediction(0.0), 0.5);
  EXPECT_NEAR(sep_prediction(1.0), 0.15865525393145705, 1e-16);
  EXPECT_EQ(sep_prediction(std::numeric_limits<double>::infinity()), 0.0);
  EXPECT_LT(sep_prediction(1e4), 1e-300);
}

TEST(StateEvolution, TrajectoryStartsAtOneAndReachesFixedPoint) {
  const auto p = params(0.5, 0.2, 0.2);
  const auto fp = solve_fixed_point(0.6, p);
  const auto tau2 = se_trajectory(0.6, fp.gamma, p.delta, 300);
  EXPECT_EQ(tau2.front(), 1.0);
  EXPECT_NEAR(tau2.back(), fp.tau2, 1e-12);
  for (std::size_t t = 1; t < tau2.size(); ++t) EXPECT_GE(tau2[t], tau2[t - 1] - 1e-15);
}

TEST(ModelParams, Validation) {
  EXPECT_THROW(params(0.0, 0.2, 0.2).validate(), ConfigError);
  EXPECT_THROW(params(0.5, -0.1, 0.2).validate(), ConfigError);
  EXPECT_THROW(params(0.5, 0.2, 0.0).validate(), ConfigError);
  EXPECT_THROW(params(0.5, 0.2, 0.2, -1.0).validate(), ConfigError);
  EXPECT_NO_THROW(params(0.5, 0.0, 0.2).validate());
  EXPECT_EQ(params(0.5, 0.0, 0.2).analysis_rho(), ModelParams::kContinuationRho);
}

TEST(Snr, DecibelMapping) {
  EXPECT_DOUBLE_EQ(sigma2_from_snr_db(0.0), 1.0);
  EXPECT_NEAR(sigma2_from_snr_db(10.0), 0.1, 1e-16);
  EXPECT_NEAR(sigma2_from_snr_db(-10.0), 10.0, 1e-14);
}
