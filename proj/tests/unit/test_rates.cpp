#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "erlab/rates/rates.hpp"
#include "erlab/risk/excess_risk.hpp"

using namespace erlab::rates;
using erlab::Vector;
using erlab::prob::SeedSpec;

namespace {

erlab::bayes::LinearModelSpec constant_spec(double sw, double se) {
  erlab::bayes::LinearModelSpec s;
  s.d = 1;
  s.feature_map = erlab::bayes::MonomialFeatures{0};
  s.sigma_w = sw;
  s.sigma_e = se;
  return s;
}

}  // namespace

TEST(Lemma2Residual, UnitScaleFixtures) {
  const auto r = lemma2_residual(1.0, 1.0, {1, 100, 10000});
  EXPECT_NEAR(r[0], 0.5 * std::log(2.0), 1e-14);
  EXPECT_NEAR(r[0], 0.34657, 5e-6);
  EXPECT_NEAR(r[1], 0.004975, 5e-7);
  EXPECT_LT(r[2], r[1]);
  EXPECT_LT(r[1], 0.01);
}

TEST(Lemma2Residual, ClosedFormAndMonotone) {
  // For any scales the residual is 1/2 log(1 + sigma^2 / (n sigma_w^2)).
  std::vector<long> ns;
  for (long n = 1; n <= 1 << 16; n *= 2) ns.push_back(n);
  for (auto [sw, s] : {std::pair{1.0, 1.0}, std::pair{0.3, 2.0}, std::pair{5.0, 0.1}}) {
    const auto r = lemma2_residual(sw, s, ns);
    for (std::size_t i = 0; i < ns.size(); ++i) {
      EXPECT_NEAR(r[i], 0.5 * std::log1p(s * s / (static_cast<double>(ns[i]) * sw * sw)), 1e-12);
      EXPECT_GT(r[i], 0.0);
      if (i > 0) EXPECT_LT(r[i], r[i - 1]);
    }
  }
  EXPECT_THROW(lemma2_residual(0.0, 1.0, {1}), std::invalid_argument);
  EXPECT_THROW(lemma2_residual(1.0, 1.0, {0}), std::invalid_argument);
}

TEST(FitRate, RecoversPowerLaws) {
  std::vector<double> ns = {16, 64, 256, 1024, 4096};
  for (double slope : {-1.0, -0.5, 0.25}) {
    std::vector<double> v;
    for (double n : ns) v.push_back(3.0 * std::pow(n, slope));
    const auto fit = fit_rate(ns, v);
    EXPECT_NEAR(fit.slope, slope, 1e-10);
    EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-10);
    EXPECT_NEAR(fit.r2, 1.0, 1e-12);
  }
  EXPECT_THROW(fit_rate({1.0}, {1.0}), std::invalid_argument);
  EXPECT_THROW(fit_rate({2.0, 1.0}, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(fit_rate({1.0, 2.0}, {1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(fit_rate({1.0, 2.0}, {1.0}), std::invalid_argument);
}

TEST(LowerRate, Fixtures) {
  EXPECT_NEAR(lower_rate_bound(1, 0.0, 100).value, 1.0 / (100.0 * std::numbers::pi), 1e-17);
  EXPECT_NEAR(lower_rate_bound(1, 0.0, 100).value, 0.0031831, 5e-8);
  for (long n : {1L, 7L, 1000L}) {
    EXPECT_NEAR(lower_rate_bound(3, 0.4, 2 * n).value, 0.5 * lower_rate_bound(3, 0.4, n).value, 1e-16);
  }
  // d = 2, E log|J| = log 4: (2 / (n pi)) * exp(-log 4) = 1 / (2 n pi).
  EXPECT_NEAR(lower_rate_bound(2, std::log(4.0), 10).value, 1.0 / (20.0 * std::numbers::pi), 1e-16);
  // Small n against a strong prior (lambda = 16): the asymptotic bound exceeds
  // the Bayes risk 4 / (4 + 16).
  EXPECT_GT(lower_rate_bound(1, -std::log(2.0), 4).value, 4.0 / 20.0);
  EXPECT_EQ(lower_rate_bound(1, 0.0, 5).name, erlab::bounds::BoundName::lower_rate);
  EXPECT_THROW(lower_rate_bound(0, 0.0, 5), std::invalid_argument);
}

TEST(LowerRate, BelowBayesOptimalRisk) {
  // phi = 1: Fisher information 1 / sigma_e^2, so log|J| = -log sigma_e, and
  // the Bayes-optimal risk is sigma_e^2 / (n + lambda).  The o(1) term is
  // dropped, so the bound is only meaningful once n dominates lambda.
  for (auto [sw, se] : {std::pair{1.0, 1.0}, std::pair{0.5, 2.0}}) {
    const auto s = constant_spec(sw, se);
    for (long n : {64L, 256L}) {
      const double bound = lower_rate_bound(1, -std::log(se), n).value;
      EXPECT_LE(bound, se * se / (static_cast<double>(n) + s.lambda()));
      const auto mc = erlab::risk::bayes_excess_risk_mc(s, erlab::risk::BayesOptimal{s.prior()}, s.prior(), n,
                                                         20000, SeedSpec{71, static_cast<std::uint64_t>(n)});
      EXPECT_LE(bound, mc.mean + 3.0 * mc.std_error);
      EXPECT_NEAR(mc.mean, se * se / (static_cast<double>(n) + s.lambda()), 3.0 * mc.std_error);
    }
  }
}

TEST(FitRate, PosteriorSamplingExcessDecaysAtParametricRate) {
  const auto s = constant_spec(1.0, 1.0);
  std::vector<double> ns;
  std::vector<double> vals;
  for (long n : {16L, 64L, 256L, 1024L, 4096L}) {
    const auto mc = erlab::risk::bayes_excess_risk_mc(s, erlab::risk::PosteriorSampling{s.prior()}, s.prior(), n,
                                                       4000, SeedSpec{72, static_cast<std::uint64_t>(n)});
    ns.push_back(static_cast<double>(n));
    vals.push_back(mc.mean);
  }
  const auto fit = fit_rate(ns, vals);
  EXPECT_GE(fit.slope, -1.1);
  EXPECT_LE(fit.slope, -0.4);
}
