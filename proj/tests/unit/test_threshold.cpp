#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "erlab/prob/random.hpp"
#include "erlab/vc/threshold.hpp"

using namespace erlab::vc;

namespace {

/// Walks every (t, x^m, x) with its joint probability and the posterior
/// predictive P(Y = 1 | x, z^m), computed by plain Bayes rule over all k+1
/// thresholds (no version-space shortcut).
void for_each_case(const ThresholdClassSpec& s, long m,
                   const std::function<void(int t, double p, double pred, int y)>& fn) {
  const int k = s.k;
  std::vector<int> xs(static_cast<std::size_t>(m));
  std::function<void(long, double)> rec = [&](long i, double pxs) {
    if (i == m) {
      for (int t = 1; t <= k + 1; ++t) {
        const double pt = s.prior_t[static_cast<std::size_t>(t - 1)];
        for (int x = 1; x <= k; ++x) {
          double num = 0.0;
          double den = 0.0;
          for (int u = 1; u <= k + 1; ++u) {
            bool ok = true;
            for (int xi : xs) ok = ok && ((xi >= u) == (xi >= t));
            if (!ok) continue;
            den += s.prior_t[static_cast<std::size_t>(u - 1)];
            if (x >= u) num += s.prior_t[static_cast<std::size_t>(u - 1)];
          }
          fn(t, pt * pxs * s.px[static_cast<std::size_t>(x - 1)], num / den, x >= t ? 1 : 0);
        }
      }
      return;
    }
    for (int x = 1; x <= k; ++x) {
      xs[static_cast<std::size_t>(i)] = x;
      rec(i + 1, pxs * s.px[static_cast<std::size_t>(x - 1)]);
    }
  };
  rec(0, 1.0);
}

double hb(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

/// I(T; Y | X, Z^m) = E H_b(P(Y = 1 | X, Z^m)), since Y is a function of (T, X).
double oracle_cmi_test(const ThresholdClassSpec& s, long m) {
  double total = 0.0;
  for_each_case(s, m, [&](int, double p, double pred, int) { total += p * hb(pred); });
  return total;
}

/// Chain rule: I(T; Y^n | X^n) = sum_{m < n} I(T; Y | X, Z^m).
double oracle_cmi_yn(const ThresholdClassSpec& s, long n) {
  double total = 0.0;
  for (long m = 0; m < n; ++m) total += oracle_cmi_test(s, m);
  return total;
}

double oracle_bayes_excess(const ThresholdClassSpec& s, long n, bool bayes_optimal) {
  double total = 0.0;
  for_each_case(s, n, [&](int, double p, double pred, int y) {
    double p1 = pred;
    if (bayes_optimal) p1 = std::abs(pred - 0.5) <= 1e-12 ? 0.5 : (pred > 0.5 ? 1.0 : 0.0);
    total += p * (y ? 1.0 - p1 : p1);
  });
  return total;
}

ThresholdClassSpec random_spec(int k, erlab::prob::Stream& rng) {
  ThresholdClassSpec s{k, std::vector<double>(static_cast<std::size_t>(k)),
                       std::vector<double>(static_cast<std::size_t>(k + 1))};
  auto fill = [&](std::vector<double>& v) {
    double sum = 0.0;
    for (double& x : v) sum += (x = 0.05 + rng.uniform());
    for (double& x : v) x /= sum;
  };
  fill(s.px);
  fill(s.prior_t);
  return s;
}

ThresholdClassSpec point_mass(int k, int t) {
  auto s = ThresholdClassSpec::uniform(k);
  std::fill(s.prior_t.begin(), s.prior_t.end(), 0.0);
  s.prior_t[static_cast<std::size_t>(t - 1)] = 1.0;
  return s;
}

}  // namespace

TEST(Threshold, SpecValidation) {
  EXPECT_NO_THROW(ThresholdClassSpec::uniform(3).validate());
  auto s = ThresholdClassSpec::uniform(3);
  s.px = {0.5, 0.5};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = ThresholdClassSpec::uniform(3);
  s.prior_t[0] += 0.1;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = ThresholdClassSpec::uniform(3);
  s.px = {1.5, -0.5, 0.0};
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(GrowthCount, Examples) {
  const auto s = ThresholdClassSpec::uniform(5);
  EXPECT_EQ(growth_count(s, {}), 1u);
  EXPECT_EQ(growth_count(s, {1, 3, 5}), 4u);
  EXPECT_EQ(growth_count(s, {2, 2, 4, 4, 4}), 3u);
  EXPECT_EQ(growth_count(s, {1, 2, 3, 4, 5}), 6u);
}

TEST(SauerBound, Fixtures) {
  EXPECT_NEAR(sauer_bound(1, 10), 0.330259, 5e-7);
  EXPECT_DOUBLE_EQ(sauer_bound(1, 1), 1.0);
  for (long n = 3; n < 200; ++n) EXPECT_LT(sauer_bound(1, n + 1), sauer_bound(1, n));
  EXPECT_THROW(sauer_bound(1, 0), std::invalid_argument);
}

TEST(ExactCmi, TrivialCases) {
  EXPECT_EQ(exact_cmi_yn(ThresholdClassSpec::uniform(3), 0), 0.0);
  EXPECT_NEAR(exact_cmi_yn(point_mass(3, 2), 4), 0.0, 1e-15);
  EXPECT_NEAR(exact_cmi_test(point_mass(3, 2), 4), 0.0, 1e-15);
}

TEST(ExactCmi, UniformK3N2Fixture) {
  // Frozen value; H(Y^2 | X^2) computed directly over the 9 input pairs agrees.
  const auto s = ThresholdClassSpec::uniform(3);
  const double oracle = oracle_cmi_yn(s, 2);
  EXPECT_NEAR(oracle, 0.8951268994263, 1e-12);
  EXPECT_NEAR(exact_cmi_yn(s, 2), oracle, 1e-12);
}

TEST(ExactCmi, MatchesBayesRuleOracle) {
  erlab::prob::Stream rng(erlab::prob::SeedSpec{41, 0});
  for (int k = 1; k <= 4; ++k) {
    for (long n = 0; n <= 3; ++n) {
      const auto s = random_spec(k, rng);
      EXPECT_NEAR(exact_cmi_test(s, n), oracle_cmi_test(s, n), 1e-12) << "k=" << k << " n=" << n;
      EXPECT_NEAR(exact_cmi_yn(s, n), oracle_cmi_yn(s, n), 1e-12) << "k=" << k << " n=" << n;
    }
  }
}

TEST(ExactCmi, InformationChainHoldsExactly) {
  for (int k = 1; k <= 5; ++k) {
    const auto s = ThresholdClassSpec::uniform(k);
    for (long n = 1; n <= 5; ++n) {
      const double test = exact_cmi_test(s, n);
      const double avg = exact_cmi_yn(s, n) / static_cast<double>(n);
      std::vector<int> pts;
      for (long i = 0; i < n; ++i) pts.push_back(static_cast<int>(i % k) + 1);
      std::sort(pts.begin(), pts.end());
      // Worst case over n points: as many distinct values as possible.
      std::vector<int> distinct;
      for (long i = 0; i < std::min<long>(n, k); ++i) distinct.push_back(static_cast<int>(i) + 1);
      const double growth = std::log(static_cast<double>(growth_count(s, distinct))) / static_cast<double>(n);
      EXPECT_LE(test, avg + 1e-12) << "k=" << k << " n=" << n;
      EXPECT_LE(avg, growth + 1e-12) << "k=" << k << " n=" << n;
      EXPECT_LE(growth, sauer_bound(kThresholdVcDim, n) + 1e-12) << "k=" << k << " n=" << n;
    }
  }
}

TEST(ExactCmi, SizeGuard) {
  EXPECT_THROW(exact_cmi_yn(ThresholdClassSpec::uniform(8), 8), EnumerationTooLarge);
  EXPECT_THROW(exact_cmi_test(ThresholdClassSpec::uniform(10), 6), EnumerationTooLarge);
  EXPECT_NO_THROW(exact_cmi_yn(ThresholdClassSpec::uniform(2), 8));
}

TEST(VersionSpace, IntervalOfConsistentThresholds) {
  const auto vs = version_space(5, {2, 4, 3}, {0, 1, 1});
  EXPECT_EQ(vs.lo, 3);
  EXPECT_EQ(vs.hi, 3);
  const auto open = version_space(5, {}, {});
  EXPECT_EQ(open.lo, 1);
  EXPECT_EQ(open.hi, 6);
  const auto post = threshold_posterior({0.1, 0.2, 0.3, 0.2, 0.1, 0.1}, version_space(5, {2, 5}, {0, 1}));
  EXPECT_EQ(post[0], 0.0);
  EXPECT_NEAR(post[2], 0.3 / 0.6, 1e-15);
  EXPECT_EQ(post[5], 0.0);
}

TEST(ExactExcess, FixedThresholdIsMassBetweenThresholds) {
  auto s = ThresholdClassSpec::uniform(4);
  s.px = {0.1, 0.2, 0.3, 0.4};
  EXPECT_EQ(exact_excess(s, FixedThreshold{3}, 3, 2), 0.0);
  EXPECT_NEAR(exact_excess(s, FixedThreshold{2}, 4, 2), 0.2 + 0.3, 1e-15);
  EXPECT_NEAR(exact_excess(s, FixedThreshold{5}, 1, 0), 1.0, 1e-15);
  EXPECT_NEAR(exact_excess(s, LabelTable{{1, 0, 1, 0}}, 5, 1), 0.1 + 0.3, 1e-15);
  EXPECT_THROW(exact_excess(s, FixedThreshold{1}, 6, 1), std::invalid_argument);
}

TEST(ExactBayesExcess, MatchesBayesRuleOracle) {
  erlab::prob::Stream rng(erlab::prob::SeedSpec{42, 0});
  for (int k = 1; k <= 4; ++k) {
    for (long n = 0; n <= 3; ++n) {
      const auto s = random_spec(k, rng);
      EXPECT_NEAR(exact_bayes_excess(s, n, ThresholdLearnerKind::posterior_sampling),
                  oracle_bayes_excess(s, n, false), 1e-12);
      EXPECT_NEAR(exact_bayes_excess(s, n, ThresholdLearnerKind::bayes_optimal),
                  oracle_bayes_excess(s, n, true), 1e-12);
    }
  }
  // Uniform priors produce exact posterior ties.
  const auto u = ThresholdClassSpec::uniform(3);
  EXPECT_NEAR(exact_bayes_excess(u, 2, ThresholdLearnerKind::bayes_optimal),
              oracle_bayes_excess(u, 2, true), 1e-12);
}

TEST(ExactBayesExcess, PointMassPriorAndLargeSample) {
  EXPECT_NEAR(exact_bayes_excess(point_mass(4, 3), 2, ThresholdLearnerKind::posterior_sampling), 0.0, 1e-15);
  const auto s = ThresholdClassSpec::uniform(2);
  EXPECT_LE(exact_bayes_excess(s, 8, ThresholdLearnerKind::posterior_sampling), 2.0 * std::pow(0.5, 8));
}

TEST(ExactBayesExcess, OrderedAndBelowRealizableBound) {
  for (int k = 1; k <= 5; ++k) {
    const auto s = ThresholdClassSpec::uniform(k);
    for (long n = 1; n <= 5; ++n) {
      const double bo = exact_bayes_excess(s, n, ThresholdLearnerKind::bayes_optimal);
      const double ps = exact_bayes_excess(s, n, ThresholdLearnerKind::posterior_sampling);
      EXPECT_LE(bo, ps + 1e-12) << "k=" << k << " n=" << n;
      EXPECT_LE(ps, 3.0 * exact_cmi_test(s, n) + 1e-12) << "k=" << k << " n=" << n;
    }
  }
}

TEST(Threshold, EnumerationIsThreadCountInvariant) {
  const auto s = ThresholdClassSpec::uniform(5);
  const unsigned prev = erlab::max_threads();
  erlab::set_max_threads(1);
  const double one = exact_cmi_test(s, 5);
  erlab::set_max_threads(8);
  const double eight = exact_cmi_test(s, 5);
  erlab::set_max_threads(prev);
  EXPECT_EQ(one, eight);
}
