#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "erlab/prob/gaussian.hpp"

using erlab::Matrix;
using erlab::Vector;
using erlab::prob::Gaussian;
using erlab::prob::SeedSpec;
using erlab::prob::Stream;

namespace {

double normal_pdf(double x, double m, double s2) {
  return std::exp(-(x - m) * (x - m) / (2.0 * s2)) / std::sqrt(2.0 * std::numbers::pi * s2);
}

double bivariate_pdf(double x, double y, const Vector& m, const Matrix& s) {
  const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  const double dx = x - m[0];
  const double dy = y - m[1];
  const double q = (s(1, 1) * dx * dx - 2.0 * s(0, 1) * dx * dy + s(0, 0) * dy * dy) / det;
  return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(det));
}

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

Matrix random_spd(Stream& s, int d, double floor) {
  Matrix a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = s.normal();
  }
  return a * a.transpose() / d + floor * Matrix::Identity(d, d);
}

}  // namespace

TEST(Gaussian, RejectsBadShapes) {
  EXPECT_THROW(Gaussian(Vector::Zero(2), Matrix::Identity(3, 3)), erlab::DimensionMismatch);
  Matrix asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(Gaussian(Vector::Zero(2), asym), std::invalid_argument);
  Matrix indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(Gaussian(Vector::Zero(2), indefinite), std::invalid_argument);
}

TEST(Gaussian, AcceptsSingularPsd) {
  Matrix s(2, 2);
  s << 1.0, 1.0, 1.0, 1.0;
  EXPECT_NO_THROW(Gaussian(Vector::Zero(2), s));
  EXPECT_NO_THROW(Gaussian(Vector::Zero(3), Matrix::Zero(3, 3)));
}

TEST(GaussianKl, OneDimensionalMatchesQuadrature) {
  Stream s(SeedSpec{101, 0});
  for (int trial = 0; trial < 20; ++trial) {
    const double mp = s.normal();
    const double mq = s.normal();
    const double vp = 0.2 + 2.0 * s.uniform();
    const double vq = 0.2 + 2.0 * s.uniform();
    const double oracle = GK::integrate(
        [&](double x) {
          const double p = normal_pdf(x, mp, vp);
          return p > 0.0 ? p * std::log(p / normal_pdf(x, mq, vq)) : 0.0;
        },
        mp - 12.0 * std::sqrt(vp), mp + 12.0 * std::sqrt(vp), 15, 1e-13);
    const double kl = erlab::prob::gaussian_kl(Gaussian(Vector::Constant(1, mp), Matrix::Constant(1, 1, vp)),
                                               Gaussian(Vector::Constant(1, mq), Matrix::Constant(1, 1, vq)));
    EXPECT_NEAR(kl, oracle, 1e-9 * std::max(1.0, oracle));
  }
}

TEST(GaussianKl, TwoDimensionalMatchesNestedQuadrature) {
  Stream s(SeedSpec{102, 0});
  for (int trial = 0; trial < 3; ++trial) {
    const Matrix sp = random_spd(s, 2, 0.3);
    const Matrix sq = random_spd(s, 2, 0.3);
    const Vector mp = Vector::NullaryExpr(2, [&](Eigen::Index) { return 0.5 * s.normal(); });
    const Vector mq = Vector::NullaryExpr(2, [&](Eigen::Index) { return 0.5 * s.normal(); });
    const double rx = 10.0 * std::sqrt(sp(0, 0));
    const double ry = 10.0 * std::sqrt(sp(1, 1));
    const double oracle = GK::integrate(
        [&](double x) {
          return GK::integrate(
              [&](double y) {
                const double p = bivariate_pdf(x, y, mp, sp);
                return p > 0.0 ? p * std::log(p / bivariate_pdf(x, y, mq, sq)) : 0.0;
              },
              mp[1] - ry, mp[1] + ry, 10, 1e-12);
        },
        mp[0] - rx, mp[0] + rx, 10, 1e-12);
    EXPECT_NEAR(erlab::prob::gaussian_kl(Gaussian(mp, sp), Gaussian(mq, sq)), oracle, 1e-7);
  }
}

TEST(GaussianKl, SelfIsZeroAndRandomIsNonnegative) {
  Stream s(SeedSpec{103, 0});
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + static_cast<int>(s.below(6));
    const Gaussian p(Vector::NullaryExpr(d, [&](Eigen::Index) { return s.normal(); }),
                     random_spd(s, d, 0.05));
    const Gaussian q(Vector::NullaryExpr(d, [&](Eigen::Index) { return s.normal(); }),
                     random_spd(s, d, 0.05));
    EXPECT_NEAR(erlab::prob::gaussian_kl(p, p), 0.0, 1e-10);
    EXPECT_GE(erlab::prob::gaussian_kl(p, q), 0.0);
  }
}

TEST(GaussianKl, IsotropicMeanShiftClosedForm) {
  // KL(N(mu, s^2 I) || N(0, s^2 I)) = ||mu||^2 / (2 s^2).
  Vector mu(3);
  mu << 0.3, -0.4, 1.2;
  const double s = 0.7;
  EXPECT_NEAR(erlab::prob::gaussian_kl(Gaussian::isotropic(mu, s), Gaussian::isotropic(Vector::Zero(3), s)),
              mu.squaredNorm() / (2.0 * s * s), 1e-14);
}

TEST(GaussianKl, DegenerateCases) {
  const Gaussian good = Gaussian::isotropic(Vector::Zero(2), 1.0);
  const Gaussian point(Vector::Zero(2), Matrix::Zero(2, 2));
  EXPECT_EQ(erlab::prob::gaussian_kl(point, good), std::numeric_limits<double>::infinity());
  EXPECT_THROW(erlab::prob::gaussian_kl(good, point), erlab::DegenerateCovariance);
  EXPECT_THROW(erlab::prob::gaussian_kl(good, Gaussian::isotropic(Vector::Zero(3), 1.0)),
               erlab::DimensionMismatch);
}

TEST(GaussianEntropy, OneDimensionalMatchesQuadrature) {
  for (double v : {0.01, 0.5, 1.0, 7.0}) {
    const double oracle = GK::integrate(
        [&](double x) {
          const double p = normal_pdf(x, 0.3, v);
          return p > 0.0 ? -p * std::log(p) : 0.0;
        },
        0.3 - 14.0 * std::sqrt(v), 0.3 + 14.0 * std::sqrt(v), 15, 1e-13);
    EXPECT_NEAR(erlab::prob::gaussian_entropy(Gaussian(Vector::Constant(1, 0.3), Matrix::Constant(1, 1, v))),
                oracle, 1e-9);
  }
}

TEST(GaussianEntropy, DegenerateThrows) {
  EXPECT_THROW(erlab::prob::gaussian_entropy(Gaussian(Vector::Zero(2), Matrix::Zero(2, 2))),
               erlab::DegenerateCovariance);
}

TEST(GaussianSampler, EmpiricalMomentsMatch) {
  Stream s(SeedSpec{104, 0});
  Matrix cov = random_spd(s, 3, 0.2);
  Vector mean(3);
  mean << 1.0, -2.0, 0.5;
  const auto draws = erlab::prob::sample(Gaussian(mean, cov), SeedSpec{104, 1}, 200000);
  Vector m = Vector::Zero(3);
  for (const auto& x : draws) m += x;
  m /= static_cast<double>(draws.size());
  Matrix c = Matrix::Zero(3, 3);
  for (const auto& x : draws) c += (x - m) * (x - m).transpose();
  c /= static_cast<double>(draws.size() - 1);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(m[i], mean[i], 5.0 * std::sqrt(cov(i, i) / 200000.0));
    for (int j = 0; j < 3; ++j) {
      EXPECT_NEAR(c(i, j), cov(i, j), 5.0 * std::sqrt((cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) / 200000.0));
    }
  }
}

TEST(GaussianSampler, PointMassAndSingularCovariance) {
  Vector mean(2);
  mean << 3.0, 4.0;
  Stream s(SeedSpec{105, 0});
  const erlab::prob::GaussianSampler point(Gaussian(mean, Matrix::Zero(2, 2)));
  EXPECT_EQ(point.draw(s), mean);
  Matrix rank1(2, 2);
  rank1 << 1.0, 1.0, 1.0, 1.0;
  const erlab::prob::GaussianSampler line(Gaussian(Vector::Zero(2), rank1));
  for (int i = 0; i < 100; ++i) {
    const Vector x = line.draw(s);
    EXPECT_NEAR(x[0], x[1], 1e-12);
  }
}

TEST(GaussianSampler, SampleIndependentOfThreads) {
  const Gaussian g = Gaussian::isotropic(Vector::Zero(5), 2.0);
  const unsigned saved = erlab::max_threads();
  erlab::set_max_threads(1);
  const auto a = erlab::prob::sample(g, SeedSpec{9, 9}, 3000);
  erlab::set_max_threads(8);
  const auto b = erlab::prob::sample(g, SeedSpec{9, 9}, 3000);
  erlab::set_max_threads(saved);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i], b[i]);
}
