// Multivariate normal distributions and their exact information functionals.
// All information quantities are in nats.
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <optional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "erlab/prob/parallel.hpp"
#include "erlab/prob/random.hpp"

namespace erlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A covariance that was required to be positive definite is not.
struct DegenerateCovariance : std::domain_error {
  using std::domain_error::domain_error;
};

}  // namespace erlab

namespace erlab::prob {

/// Pivots below this are treated as a failed Cholesky factorization.
inline constexpr double kCholeskyPivotFloor = 1e-12;

/// N(mean, cov) with cov symmetric positive semi-definite.
class Gaussian {
 public:
  Gaussian(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
    if (cov_.rows() != cov_.cols() || cov_.rows() != mean_.size()) {
      throw DimensionMismatch("Gaussian: mean has dimension " + std::to_string(mean_.size()) +
                              " but covariance is " + std::to_string(cov_.rows()) + "x" +
                              std::to_string(cov_.cols()));
    }
    const double scale = dim() > 0 ? std::max(1.0, cov_.cwiseAbs().maxCoeff()) : 1.0;
    if (dim() > 0 && (cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw std::invalid_argument("Gaussian: covariance is not symmetric");
    }
    cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
    if (dim() > 0 && Eigen::LLT<Matrix>(cov_).info() != Eigen::Success) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(cov_, Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
        throw std::invalid_argument("Gaussian: covariance is not positive semi-definite");
      }
    }
  }

  /// N(mean, sigma^2 I).
  static Gaussian isotropic(Vector mean, double sigma) {
    const auto d = mean.size();
    return {std::move(mean), sigma * sigma * Matrix::Identity(d, d)};
  }

  [[nodiscard]] Eigen::Index dim() const noexcept { return mean_.size(); }
  [[nodiscard]] const Vector& mean() const noexcept { return mean_; }
  [[nodiscard]] const Matrix& cov() const noexcept { return cov_; }

 private:
  Vector mean_;
  Matrix cov_;
};

/// Lower-triangular Cholesky factor of a strictly positive definite matrix,
/// or nothing if some pivot falls below kCholeskyPivotFloor.
inline std::optional<Matrix> strict_cholesky(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Matrix l = llt.matrixL();
  if (a.rows() > 0 && l.diagonal().minCoeff() < kCholeskyPivotFloor) return std::nullopt;
  return l;
}

/// log|A| for symmetric positive definite A.
inline double log_det_spd(const Matrix& a, const char* what) {
  auto l = strict_cholesky(a);
  if (!l) throw DegenerateCovariance(std::string(what) + ": covariance is singular");
  return 2.0 * l->diagonal().array().log().sum();
}

/// KL(p || q) = 1/2 [log(|Sq|/|Sp|) - d + tr(Sq^-1 Sp) + (mq-mp)' Sq^-1 (mq-mp)].
/// Returns +inf when p is degenerate and q is not.
inline double gaussian_kl(const Gaussian& p, const Gaussian& q) {
  if (p.dim() != q.dim()) {
    throw DimensionMismatch("gaussian_kl: dimensions " + std::to_string(p.dim()) + " and " +
                            std::to_string(q.dim()) + " differ");
  }
  auto lq = strict_cholesky(q.cov());
  if (!lq) throw DegenerateCovariance("gaussian_kl: reference covariance is singular");
  const auto d = static_cast<double>(p.dim());
  auto lp = strict_cholesky(p.cov());
  if (!lp) return std::numeric_limits<double>::infinity();

  const auto lq_tri = lq->triangularView<Eigen::Lower>();
  // tr(Sq^-1 Sp) = ||Lq^-1 Lp||_F^2
  const Matrix a = lq_tri.solve(*lp);
  const Vector diff = lq_tri.solve(q.mean() - p.mean());
  const double log_det_q = 2.0 * lq->diagonal().array().log().sum();
  const double log_det_p = 2.0 * lp->diagonal().array().log().sum();
  const double kl =
      0.5 * (log_det_q - log_det_p - d + a.squaredNorm() + diff.squaredNorm());
  return std::max(0.0, kl);
}

/// Differential entropy (d/2) log(2 pi e) + 1/2 log|S|.
inline double gaussian_entropy(const Gaussian& p) {
  const auto d = static_cast<double>(p.dim());
  return 0.5 * d * std::log(2.0 * std::numbers::pi * std::numbers::e) +
         0.5 * log_det_spd(p.cov(), "gaussian_entropy");
}

/// Draws from a fixed Gaussian through a precomputed square-root factor.
/// Cholesky is used when the covariance is safely positive definite; otherwise
/// the factor is V sqrt(max(D, 0)) from an eigendecomposition, which also
/// covers the zero-covariance case.
class GaussianSampler {
 public:
  explicit GaussianSampler(const Gaussian& g) : mean_(g.mean()) {
    if (auto l = strict_cholesky(g.cov())) {
      factor_ = std::move(*l);
    } else {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(g.cov());
      const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
      factor_ = eig.eigenvectors() * root.asDiagonal();
    }
  }

  [[nodiscard]] Eigen::Index dim() const noexcept { return mean_.size(); }

  /// Consumes dim() normals from `stream`.
  Vector draw(Stream& stream) const {
    Vector z(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) z[i] = stream.normal();
    return mean_ + factor_ * z;
  }

  /// Number of Philox blocks consumed by one draw.
  [[nodiscard]] std::uint64_t blocks_per_draw() const noexcept {
    return static_cast<std::uint64_t>((dim() + 1) / 2);
  }

 private:
  Vector mean_;
  Matrix factor_;
};

/// `count` i.i.d. draws.  Draw i reads its own block range of the stream, so
/// the output is identical for any worker count.
inline std::vector<Vector> sample(const Gaussian& p, SeedSpec seed, std::size_t count) {
  const GaussianSampler sampler(p);
  const std::uint64_t stride = std::max<std::uint64_t>(1, sampler.blocks_per_draw());
  return parallel_map<Vector>(count, [&](std::size_t i) {
    Stream stream(seed, stride * i);
    return sampler.draw(stream);
  });
}

}  // namespace erlab::prob
