#include <gtest/gtest.h>

#include <cmath>

#include "erlab/bayes/linear_model.hpp"

using erlab::Matrix;
using erlab::Vector;
using erlab::bayes::Dataset;
using erlab::bayes::LinearModelSpec;
using erlab::prob::Gaussian;
using erlab::prob::SeedSpec;
using erlab::prob::Stream;

namespace {

LinearModelSpec constant_spec(double sw, double se) {
  LinearModelSpec s;
  s.d = 1;
  s.feature_map = erlab::bayes::MonomialFeatures{0};
  s.sigma_w = sw;
  s.sigma_e = se;
  s.mu_prior = Vector::Zero(1);
  s.input_dist = erlab::bayes::UniformBox{Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)};
  return s;
}

LinearModelSpec identity_spec(Eigen::Index d, double sw, double se, Vector mu) {
  LinearModelSpec s;
  s.d = d;
  s.feature_map = erlab::bayes::IdentityFeatures{};
  s.sigma_w = sw;
  s.sigma_e = se;
  s.c = mu.norm();
  s.mu_prior = std::move(mu);
  const double h = 1.0 / std::sqrt(static_cast<double>(d));
  s.input_dist = erlab::bayes::UniformBox{Vector::Constant(d, -h), Vector::Constant(d, h)};
  return s;
}

/// argmin ||Phi w - Y||^2 + lam ||w - mu||^2 via QR of the stacked system.
Vector ridge_oracle(const Matrix& phi, const Vector& y, double lam, const Vector& mu) {
  const Eigen::Index n = phi.rows();
  const Eigen::Index d = phi.cols();
  Matrix a(n + d, d);
  a << phi, std::sqrt(lam) * Matrix::Identity(d, d);
  Vector b(n + d);
  b << y, std::sqrt(lam) * mu;
  return a.colPivHouseholderQr().solve(b);
}

}  // namespace

TEST(LinearModel, ValidateRejectsBadSpecs) {
  auto s = identity_spec(2, 1.0, 1.0, Vector::Zero(2));
  s.sigma_w = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = identity_spec(2, 1.0, 1.0, Vector::Zero(2));
  s.mu_prior = Vector::Zero(3);
  EXPECT_THROW(s.validate(), erlab::DimensionMismatch);
  s = identity_spec(2, 1.0, 1.0, Vector::Zero(2));
  s.mu_prior = Vector::Constant(2, 1.0);
  s.c = 0.5;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  auto m = constant_spec(1.0, 1.0);
  m.d = 2;
  m.mu_prior = Vector::Zero(2);
  EXPECT_THROW(m.validate(), erlab::DimensionMismatch);
}

TEST(LinearModel, LambdaIsSquaredRatio) {
  EXPECT_DOUBLE_EQ(constant_spec(0.5, 2.0).lambda(), 16.0);
}

TEST(LinearModel, FeatureMaps) {
  LinearModelSpec s = constant_spec(1.0, 1.0);
  s.feature_map = erlab::bayes::MonomialFeatures{2};
  s.d = 3;
  s.mu_prior = Vector::Zero(3);
  const Vector phi = erlab::bayes::features(s, Vector::Constant(1, 3.0));
  EXPECT_EQ(phi, (Vector(3) << 1.0, 3.0, 9.0).finished());
  Matrix rows(2, 2);
  rows << 1.0, 0.0, 0.0, 1.0;
  s.feature_map = erlab::bayes::TabulatedFeatures{{0.0, 1.0}, rows};
  s.d = 2;
  EXPECT_EQ(erlab::bayes::features(s, Vector::Constant(1, 0.8)), (Vector(2) << 0.0, 1.0).finished());
}

TEST(LinearModel, GenerateNoiselessAndEmpty) {
  auto s = identity_spec(3, 1.0, 0.0, Vector::Zero(3));
  const auto data = erlab::bayes::generate(s, Vector::Zero(3), 20, SeedSpec{1, 1});
  EXPECT_EQ(data.ys, Vector::Zero(20));
  const auto empty = erlab::bayes::generate(s, Vector::Zero(3), 0, SeedSpec{1, 1});
  EXPECT_EQ(empty.n(), 0);
}

TEST(LinearModel, GenerateNoiseVariance) {
  auto s = identity_spec(2, 1.0, 0.7, Vector::Zero(2));
  const Vector w = (Vector(2) << 0.4, -1.0).finished();
  const auto data = erlab::bayes::generate(s, w, 100000, SeedSpec{2, 1});
  const Vector resid = data.ys - data.phi * w;
  const double var = resid.squaredNorm() / static_cast<double>(resid.size());
  EXPECT_NEAR(var, 0.49, 0.03 * 0.49);
}

TEST(LinearModel, PosteriorEmptyDataIsPrior) {
  auto s = identity_spec(2, 0.8, 1.0, (Vector(2) << 0.1, 0.2).finished());
  const auto data = erlab::bayes::generate(s, Vector::Zero(2), 0, SeedSpec{3, 0});
  const Gaussian post = erlab::bayes::posterior(s, data);
  EXPECT_TRUE(post.mean().isApprox(s.mu_prior, 1e-15));
  EXPECT_TRUE(post.cov().isApprox(0.64 * Matrix::Identity(2, 2), 1e-14));
}

TEST(LinearModel, PosteriorHandUpdate) {
  // phi = 1, sigma_w = sigma_e = 1, mu = 0, one observation y = 2 -> N(1, 1/2).
  auto s = constant_spec(1.0, 1.0);
  const auto data = erlab::bayes::make_dataset(s, {Vector::Constant(1, 0.3)}, Vector::Constant(1, 2.0));
  const Gaussian post = erlab::bayes::posterior(s, data);
  EXPECT_NEAR(post.mean()[0], 1.0, 1e-15);
  EXPECT_NEAR(post.cov()(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(erlab::bayes::rls_predict(s, data, Vector::Constant(1, -0.9)), 1.0, 1e-15);
}

TEST(LinearModel, PosteriorMeanIsRidgeMinimizer) {
  Stream rng(SeedSpec{4, 0});
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(8));
    const Eigen::Index n = static_cast<Eigen::Index>(rng.below(65));
    Vector mu(d);
    for (Eigen::Index i = 0; i < d; ++i) mu[i] = rng.normal();
    auto s = identity_spec(d, 0.2 + 2.0 * rng.uniform(), 0.2 + 2.0 * rng.uniform(), mu);
    Vector w(d);
    for (Eigen::Index i = 0; i < d; ++i) w[i] = rng.normal();
    const auto data = erlab::bayes::generate(s, w, n, rng);
    const Vector oracle = ridge_oracle(data.phi, data.ys, s.lambda(), mu);
    const Gaussian post = erlab::bayes::posterior(s, data);
    EXPECT_LE((post.mean() - oracle).lpNorm<Eigen::Infinity>(), 1e-10 * std::max(1.0, oracle.norm()))
        << "d=" << d << " n=" << n;
    // Covariance: inverse of the information matrix, via an independent LU.
    const Matrix info = data.phi.transpose() * data.phi / (s.sigma_e * s.sigma_e) +
                        Matrix::Identity(d, d) / (s.sigma_w * s.sigma_w);
    EXPECT_LE((post.cov() - info.fullPivLu().inverse()).lpNorm<Eigen::Infinity>(), 1e-10);
  }
}

TEST(LinearModel, PosteriorUnderMatchesPosteriorAndIsSequential) {
  Stream rng(SeedSpec{5, 0});
  auto s = identity_spec(3, 0.9, 0.6, (Vector(3) << 0.2, 0.0, -0.1).finished());
  const Vector w = (Vector(3) << 1.0, -0.5, 0.25).finished();
  const auto d1 = erlab::bayes::generate(s, w, 7, rng);
  const auto d2 = erlab::bayes::generate(s, w, 5, rng);
  Dataset all{d1.xs, Vector(12), Matrix(12, 3)};
  all.xs.insert(all.xs.end(), d2.xs.begin(), d2.xs.end());
  all.ys << d1.ys, d2.ys;
  all.phi << d1.phi, d2.phi;

  const Gaussian direct = erlab::bayes::posterior(s, all);
  const Gaussian general = erlab::bayes::posterior_under(s.prior(), all, s.sigma_e);
  const Gaussian chained = erlab::bayes::posterior_under(
      erlab::bayes::posterior_under(s.prior(), d1, s.sigma_e), d2, s.sigma_e);
  EXPECT_TRUE(general.mean().isApprox(direct.mean(), 1e-12));
  EXPECT_TRUE(general.cov().isApprox(direct.cov(), 1e-12));
  EXPECT_TRUE(chained.mean().isApprox(direct.mean(), 1e-10));
  EXPECT_TRUE(chained.cov().isApprox(direct.cov(), 1e-10));
}

TEST(LinearModel, PosteriorUnderSingularPriorIsLimitOfRegularOnes) {
  Stream rng(SeedSpec{6, 0});
  auto s = identity_spec(2, 1.0, 0.5, Vector::Zero(2));
  const auto data = erlab::bayes::generate(s, (Vector(2) << 0.3, 0.3).finished(), 10, rng);
  Matrix rank1(2, 2);
  rank1 << 1.0, 1.0, 1.0, 1.0;
  const Vector m0 = (Vector(2) << 0.1, -0.1).finished();
  const Gaussian singular = erlab::bayes::posterior_under(Gaussian(m0, rank1), data, s.sigma_e);
  const Gaussian nearly =
      erlab::bayes::posterior_under(Gaussian(m0, rank1 + 1e-7 * Matrix::Identity(2, 2)), data, s.sigma_e);
  EXPECT_LE((singular.mean() - nearly.mean()).norm(), 1e-5);
  EXPECT_LE((singular.cov() - nearly.cov()).norm(), 1e-5);
  // A point-mass prior ignores the data.
  const Gaussian point = erlab::bayes::posterior_under(Gaussian(m0, Matrix::Zero(2, 2)), data, s.sigma_e);
  EXPECT_LE((point.mean() - m0).norm(), 1e-14);
  EXPECT_LE(point.cov().norm(), 1e-14);
}

TEST(LinearModel, MiIntegrandIsKlOfPosteriorFromPrior) {
  Stream rng(SeedSpec{7, 0});
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(5));
    auto s = identity_spec(d, 0.3 + rng.uniform(), 0.3 + rng.uniform(), Vector::Zero(d));
    const auto data = erlab::bayes::draw_training_set(s, static_cast<Eigen::Index>(rng.below(30)), rng);
    const double kl = erlab::prob::gaussian_kl(erlab::bayes::posterior(s, data), s.prior());
    EXPECT_NEAR(erlab::bayes::mi_integrand(s, data), kl, 1e-9 * std::max(1.0, kl));
    EXPECT_LE(erlab::bayes::mi_integrand(s, data), erlab::bayes::effective_dim_bound(s, data) + 1e-12);
  }
}

TEST(LinearModel, RankDeficientDirectionsContributeNothing) {
  // All inputs on the first axis: the second direction is unobserved.
  auto s = identity_spec(2, 1.0, 1.0, Vector::Zero(2));
  std::vector<Vector> xs = {(Vector(2) << 0.5, 0.0).finished(), (Vector(2) << -0.3, 0.0).finished()};
  const auto data = erlab::bayes::make_dataset(s, xs, (Vector(2) << 1.0, 0.2).finished());
  const Vector ev = erlab::bayes::scaled_design_eigenvalues(data, 2);
  EXPECT_EQ(ev.minCoeff(), 0.0);
  const Gaussian post = erlab::bayes::posterior(s, data);
  const double expected = std::log1p(ev.maxCoeff() / s.lambda()) + post.mean().squaredNorm();
  EXPECT_NEAR(erlab::bayes::effective_dim_bound(s, data), expected, 1e-14);
}

TEST(LinearModel, MiMatchesGaussianChannelForConstantFeatures) {
  const auto s = constant_spec(1.0, 1.0);
  for (long n : {1L, 4L, 16L}) {
    const auto est = erlab::bayes::mi_w_zn(s, n, 200000, SeedSpec{8, static_cast<std::uint64_t>(n)});
    const double exact = 0.5 * std::log1p(static_cast<double>(n));
    EXPECT_NEAR(est.mean, exact, 3.0 * est.std_error + 1e-12) << "n=" << n;
  }
  EXPECT_EQ(erlab::bayes::mi_w_zn(s, 0, 10, SeedSpec{8, 0}).mean, 0.0);
}

TEST(LinearModel, MiVanishesForTinyPriorAndGrowsWithN) {
  auto tiny = identity_spec(2, 1e-4, 1.0, Vector::Zero(2));
  EXPECT_LT(erlab::bayes::mi_w_zn(tiny, 16, 200, SeedSpec{9, 0}).mean, 1e-6);
  EXPECT_LT(erlab::bayes::cmi_y_given_xzn(tiny, 16, 200, SeedSpec{9, 1}).mean, 1e-8);
  auto s = identity_spec(3, 1.0, 0.5, Vector::Zero(3));
  double prev = 0.0;
  double prev_se = 0.0;
  for (long n : {1L, 4L, 16L, 64L}) {
    const auto est = erlab::bayes::mi_w_zn(s, n, 4000, SeedSpec{10, static_cast<std::uint64_t>(n)});
    EXPECT_GE(est.mean, prev - 3.0 * std::hypot(est.std_error, prev_se));
    prev = est.mean;
    prev_se = est.std_error;
  }
}

TEST(LinearModel, CmiHandFormulaAtZeroSamples) {
  const auto s = constant_spec(0.8, 0.5);
  const auto est = erlab::bayes::cmi_y_given_xzn(s, 0, 10, SeedSpec{11, 0});
  EXPECT_NEAR(est.mean, 0.5 * std::log1p(0.64 / 0.25), 1e-14);
}

TEST(LinearModel, CmiBelowAveragedMi) {
  auto s = identity_spec(2, 1.0, 1.0, Vector::Zero(2));
  for (long n : {8L, 32L}) {
    const auto cmi = erlab::bayes::cmi_y_given_xzn(s, n, 4000, SeedSpec{12, static_cast<std::uint64_t>(n)});
    const auto mi = erlab::bayes::mi_w_zn(s, n, 4000, SeedSpec{13, static_cast<std::uint64_t>(n)});
    const double nn = static_cast<double>(n);
    EXPECT_LE(cmi.mean, mi.mean / nn + 3.0 * std::hypot(cmi.std_error, mi.std_error / nn));
  }
}

TEST(LinearModel, CmiDoesNotDependOnPriorMean) {
  auto a = identity_spec(2, 1.0, 1.0, Vector::Zero(2));
  auto b = identity_spec(2, 1.0, 1.0, (Vector(2) << 0.5, -0.5).finished());
  EXPECT_EQ(erlab::bayes::cmi_y_given_xzn(a, 10, 500, SeedSpec{14, 0}).mean,
            erlab::bayes::cmi_y_given_xzn(b, 10, 500, SeedSpec{14, 0}).mean);
}

TEST(LinearModel, EffectiveDimensionBoundDominatesMi) {
  auto s = identity_spec(4, 1.0, 0.5, Vector::Zero(4));
  const auto bound = erlab::bayes::effective_dim_bound_mc(s, 32, 3000, SeedSpec{15, 0});
  const auto mi = erlab::bayes::mi_w_zn(s, 32, 3000, SeedSpec{15, 0});
  EXPECT_GE(bound.mean, mi.mean);
}
