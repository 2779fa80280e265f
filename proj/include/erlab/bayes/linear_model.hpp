// Gaussian linear data model  Y = W' phi(X) + E,  W ~ N(mu, sigma_w^2 I),
// E ~ N(0, sigma_e^2): data generation, the conjugate posterior, the ridge
// (regularized least squares) predictor, and the closed-form information
// functionals evaluated per training set.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "erlab/prob/gaussian.hpp"
#include "erlab/prob/parallel.hpp"
#include "erlab/prob/random.hpp"
#include "erlab/prob/stats.hpp"

namespace erlab::bayes {

using prob::Estimate;
using prob::Gaussian;
using prob::SeedSpec;
using prob::Stream;

// ---------------------------------------------------------------------------
// Feature maps

/// phi(x) = x on R^d.
struct IdentityFeatures {};

/// phi(x) = (1, x, x^2, ..., x^degree) for scalar x.  Degree 0 gives phi = 1.
struct MonomialFeatures {
  int degree = 1;
};

/// phi(x) = row k of `rows`, where knots[k] is the knot nearest to scalar x.
struct TabulatedFeatures {
  std::vector<double> knots;
  Matrix rows;
};

using FeatureMap = std::variant<IdentityFeatures, MonomialFeatures, TabulatedFeatures>;

// ---------------------------------------------------------------------------
// Input distributions

struct GaussianInput {
  Gaussian dist;
};

/// Independent uniform coordinates on [lo_i, hi_i].
struct UniformBox {
  Vector lo;
  Vector hi;
};

using InputDistribution = std::variant<GaussianInput, UniformBox>;

inline Eigen::Index input_dim(const InputDistribution& dist) {
  return std::visit(
      [](const auto& d) -> Eigen::Index {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GaussianInput>) {
          return d.dist.dim();
        } else {
          return d.lo.size();
        }
      },
      dist);
}

inline Vector draw_input(const InputDistribution& dist, Stream& stream) {
  return std::visit(
      [&](const auto& d) -> Vector {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GaussianInput>) {
          return prob::GaussianSampler(d.dist).draw(stream);
        } else {
          Vector x(d.lo.size());
          for (Eigen::Index i = 0; i < x.size(); ++i) {
            x[i] = d.lo[i] + (d.hi[i] - d.lo[i]) * stream.uniform();
          }
          return x;
        }
      },
      dist);
}

// ---------------------------------------------------------------------------
// Model

struct LinearModelSpec {
  Eigen::Index d = 1;
  FeatureMap feature_map = IdentityFeatures{};
  double sigma_w = 1.0;
  double sigma_e = 1.0;
  Vector mu_prior = Vector::Zero(1);
  double c = 0.0;
  InputDistribution input_dist = UniformBox{Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)};

  /// Ridge penalty sigma_e^2 / sigma_w^2.
  [[nodiscard]] double lambda() const noexcept {
    return (sigma_e * sigma_e) / (sigma_w * sigma_w);
  }

  [[nodiscard]] Gaussian prior() const { return Gaussian::isotropic(mu_prior, sigma_w); }

  /// Checks every invariant; `allow_noiseless` admits sigma_e = 0 for data
  /// generation only.
  void validate(bool allow_noiseless = false) const {
    if (d < 1) throw std::invalid_argument("LinearModelSpec: d must be positive");
    if (!(sigma_w > 0.0)) throw std::invalid_argument("LinearModelSpec: sigma_w must be > 0");
    if (allow_noiseless ? !(sigma_e >= 0.0) : !(sigma_e > 0.0)) {
      throw std::invalid_argument("LinearModelSpec: sigma_e must be > 0");
    }
    if (mu_prior.size() != d) {
      throw DimensionMismatch("LinearModelSpec: mu_prior has dimension " +
                              std::to_string(mu_prior.size()) + ", expected " +
                              std::to_string(d));
    }
    if (!(c >= 0.0) || mu_prior.norm() > c * (1.0 + 1e-12) + 1e-15) {
      throw std::invalid_argument("LinearModelSpec: ||mu_prior|| exceeds radius c");
    }
    const Eigen::Index in = input_dim(input_dist);
    std::visit(
        [&](const auto& fm) {
          using T = std::decay_t<decltype(fm)>;
          if constexpr (std::is_same_v<T, IdentityFeatures>) {
            if (in != d) throw DimensionMismatch("identity features need input dimension d");
          } else if constexpr (std::is_same_v<T, MonomialFeatures>) {
            if (fm.degree < 0) throw std::invalid_argument("monomial degree must be >= 0");
            if (in != 1) throw DimensionMismatch("monomial features need scalar inputs");
            if (fm.degree + 1 != d) throw DimensionMismatch("monomial features need d = degree + 1");
          } else {
            if (in != 1) throw DimensionMismatch("tabulated features need scalar inputs");
            if (fm.knots.empty() || static_cast<Eigen::Index>(fm.knots.size()) != fm.rows.rows()) {
              throw std::invalid_argument("tabulated features need one row per knot");
            }
            if (fm.rows.cols() != d) throw DimensionMismatch("tabulated rows must have d columns");
          }
        },
        feature_map);
    if (const auto* box = std::get_if<UniformBox>(&input_dist)) {
      if (box->lo.size() != box->hi.size() || (box->hi - box->lo).minCoeff() < 0.0) {
        throw std::invalid_argument("UniformBox: need lo <= hi coordinatewise");
      }
    }
  }
};

inline Vector features(const LinearModelSpec& spec, const Vector& x) {
  return std::visit(
      [&](const auto& fm) -> Vector {
        using T = std::decay_t<decltype(fm)>;
        if constexpr (std::is_same_v<T, IdentityFeatures>) {
          return x;
        } else if constexpr (std::is_same_v<T, MonomialFeatures>) {
          Vector phi(fm.degree + 1);
          double p = 1.0;
          for (int k = 0; k <= fm.degree; ++k) {
            phi[k] = p;
            p *= x[0];
          }
          return phi;
        } else {
          std::size_t best = 0;
          for (std::size_t k = 1; k < fm.knots.size(); ++k) {
            if (std::abs(fm.knots[k] - x[0]) < std::abs(fm.knots[best] - x[0])) best = k;
          }
          return fm.rows.row(static_cast<Eigen::Index>(best)).transpose();
        }
      },
      spec.feature_map);
}

struct Dataset {
  std::vector<Vector> xs;
  Vector ys;
  Matrix phi;  ///< n x d design matrix; row i is phi(xs[i])

  [[nodiscard]] Eigen::Index n() const noexcept { return ys.size(); }
};

/// Assembles a dataset from raw inputs, filling in the design matrix.
inline Dataset make_dataset(const LinearModelSpec& spec, std::vector<Vector> xs, Vector ys) {
  if (static_cast<Eigen::Index>(xs.size()) != ys.size()) {
    throw DimensionMismatch("make_dataset: xs and ys lengths differ");
  }
  const Eigen::Index n = ys.size();
  Dataset data{std::move(xs), std::move(ys), Matrix(n, spec.d)};
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    data.phi.row(i) = features(spec, data.xs[static_cast<std::size_t>(i)]).transpose();
  }
  return data;
}

/// n pairs with Y_i = w' phi(X_i) + E_i, continuing on `stream`.  Each pair
/// reads its input and then one noise deviate.
inline Dataset generate(const LinearModelSpec& spec, const Vector& w, Eigen::Index n,
                        Stream& stream) {
  if (w.size() != spec.d) throw DimensionMismatch("generate: dim(w) != d");
  if (n < 0) throw std::invalid_argument("generate: negative sample size");
  Dataset data{{}, Vector(n), Matrix(n, spec.d)};
  data.xs.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector x = draw_input(spec.input_dist, stream);
    const Vector phi = features(spec, x);
    data.phi.row(i) = phi.transpose();
    data.ys[i] = w.dot(phi) + spec.sigma_e * stream.normal();
    data.xs.push_back(std::move(x));
  }
  return data;
}

inline Dataset generate(const LinearModelSpec& spec, const Vector& w, Eigen::Index n,
                        SeedSpec seed) {
  spec.validate(/*allow_noiseless=*/true);
  Stream stream(seed);
  return generate(spec, w, n, stream);
}

/// Posterior N(m, S) with m = (Phi'Phi + lambda I)^-1 (Phi'Y + lambda mu) and
/// S = (Phi'Phi / sigma_e^2 + I / sigma_w^2)^-1.
inline Gaussian posterior(const LinearModelSpec& spec, const Dataset& data) {
  spec.validate();
  const double lam = spec.lambda();
  const Eigen::Index d = spec.d;
  Matrix a = data.phi.transpose() * data.phi;
  a.diagonal().array() += lam;
  const Eigen::LLT<Matrix> llt(a);
  const Vector rhs = data.phi.transpose() * data.ys + lam * spec.mu_prior;
  Vector mean = llt.solve(rhs);
  Matrix cov = (spec.sigma_e * spec.sigma_e) * llt.solve(Matrix::Identity(d, d));
  return {std::move(mean), 0.5 * (cov + cov.transpose())};
}

/// Posterior of W under an arbitrary Gaussian prior and noise sigma_e > 0.
/// Uses the information form when the prior covariance is positive definite
/// and the gain (Kalman) form otherwise, so point-mass priors are allowed.
inline Gaussian posterior_under(const Gaussian& prior, const Dataset& data, double sigma_e) {
  if (prior.dim() != data.phi.cols()) {
    throw DimensionMismatch("posterior_under: prior and design dimensions differ");
  }
  if (!(sigma_e > 0.0)) throw std::invalid_argument("posterior_under: sigma_e must be > 0");
  if (data.n() == 0) return prior;
  const double s2 = sigma_e * sigma_e;
  const Eigen::Index d = prior.dim();
  if (auto l = prob::strict_cholesky(prior.cov())) {
    const Matrix l_inv = l->triangularView<Eigen::Lower>().solve(Matrix::Identity(d, d));
    const Matrix prior_prec = l_inv.transpose() * l_inv;
    Matrix prec = data.phi.transpose() * data.phi / s2 + prior_prec;
    prec = 0.5 * (prec + prec.transpose()).eval();
    const Eigen::LLT<Matrix> llt(prec);
    Vector mean = llt.solve(data.phi.transpose() * data.ys / s2 + prior_prec * prior.mean());
    Matrix cov = llt.solve(Matrix::Identity(d, d));
    return {std::move(mean), 0.5 * (cov + cov.transpose())};
  }
  Matrix s = data.phi * prior.cov() * data.phi.transpose();
  s.diagonal().array() += s2;
  const Eigen::LLT<Matrix> llt(s);
  const Matrix cross = prior.cov() * data.phi.transpose();  // d x n
  const Matrix gain = llt.solve(cross.transpose()).transpose();
  Vector mean = prior.mean() + gain * (data.ys - data.phi * prior.mean());
  Matrix cov = prior.cov() - gain * cross.transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();
  // Clip tiny negative eigenvalues produced by cancellation.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  cov = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() *
        eig.eigenvectors().transpose();
  return {std::move(mean), 0.5 * (cov + cov.transpose())};
}

/// Regularized least-squares prediction: posterior mean dotted with phi(x).
inline double rls_predict(const LinearModelSpec& spec, const Dataset& data, const Vector& x) {
  return posterior(spec, data).mean().dot(features(spec, x));
}

/// Eigenvalues n * sigma_hat_i of Phi'Phi, with sigma_hat_i < 1e-12 set to 0.
inline Vector scaled_design_eigenvalues(const Dataset& data, Eigen::Index d) {
  if (data.n() == 0) return Vector::Zero(d);
  const Matrix gram = data.phi.transpose() * data.phi;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const auto n = static_cast<double>(data.n());
  Vector out = eig.eigenvalues();
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (out[i] / n < 1e-12) out[i] = 0.0;
  }
  return out;
}

/// Per-training-set integrand of I(W; Z^n), i.e. KL(posterior || prior):
///   1/2 [ sum_i log((n s_i + lam)/lam) - d + sum_i lam/(n s_i + lam)
///         + ||m - mu||^2 / sigma_w^2 ].
inline double mi_integrand(const LinearModelSpec& spec, const Dataset& data) {
  if (data.n() == 0) return 0.0;
  const double lam = spec.lambda();
  const Vector ev = scaled_design_eigenvalues(data, spec.d);
  double log_term = 0.0;
  double trace_term = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    log_term += std::log1p(ev[i] / lam);
    trace_term += lam / (ev[i] + lam);
  }
  const Vector shift = posterior(spec, data).mean() - spec.mu_prior;
  const double d = static_cast<double>(spec.d);
  return 0.5 * (log_term - d + trace_term + shift.squaredNorm() / (spec.sigma_w * spec.sigma_w));
}

/// Upper-bound integrand  -sum_i log(lam/(n s_i + lam)) + ||m - mu||^2 / sigma_w^2.
/// Directions with s_i = 0 contribute nothing, so only the effective
/// dimension enters.
inline double effective_dim_bound(const LinearModelSpec& spec, const Dataset& data) {
  if (data.n() == 0) return 0.0;
  const double lam = spec.lambda();
  const Vector ev = scaled_design_eigenvalues(data, spec.d);
  double log_term = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) log_term += std::log1p(ev[i] / lam);
  const Vector shift = posterior(spec, data).mean() - spec.mu_prior;
  return log_term + shift.squaredNorm() / (spec.sigma_w * spec.sigma_w);
}

/// I(W; Y | X = x, Z^n = data) = 1/2 log(1 + phi' S phi / sigma_e^2), exact for
/// this model.  Depends on the inputs only.
inline double cmi_integrand(const LinearModelSpec& spec, const Dataset& data, const Vector& x) {
  const Vector phi = features(spec, x);
  const double var = phi.dot(posterior(spec, data).cov() * phi);
  return 0.5 * std::log1p(var / (spec.sigma_e * spec.sigma_e));
}

/// Draws W from the model prior and then n training pairs, on one stream.
inline Dataset draw_training_set(const LinearModelSpec& spec, Eigen::Index n, Stream& stream) {
  Vector w(spec.d);
  for (Eigen::Index i = 0; i < spec.d; ++i) w[i] = spec.mu_prior[i] + spec.sigma_w * stream.normal();
  return generate(spec, w, n, stream);
}

/// Monte Carlo I(W; Z^n): average of mi_integrand over Z^n from the marginal.
inline Estimate mi_w_zn(const LinearModelSpec& spec, Eigen::Index n, std::size_t mc_reps,
                        SeedSpec seed) {
  spec.validate();
  if (mc_reps < 1) throw std::invalid_argument("mi_w_zn: mc_reps must be >= 1");
  if (n == 0) return {0.0, 0.0, mc_reps};
  const auto values = parallel_map<double>(mc_reps, [&](std::size_t r) {
    Stream stream(seed.child(r));
    return mi_integrand(spec, draw_training_set(spec, n, stream));
  });
  return prob::summarize(values);
}

/// Monte Carlo average of effective_dim_bound over the same draws as mi_w_zn.
inline Estimate effective_dim_bound_mc(const LinearModelSpec& spec, Eigen::Index n,
                                       std::size_t mc_reps, SeedSpec seed) {
  spec.validate();
  if (mc_reps < 1) throw std::invalid_argument("effective_dim_bound_mc: mc_reps must be >= 1");
  if (n == 0) return {0.0, 0.0, mc_reps};
  const auto values = parallel_map<double>(mc_reps, [&](std::size_t r) {
    Stream stream(seed.child(r));
    return effective_dim_bound(spec, draw_training_set(spec, n, stream));
  });
  return prob::summarize(values);
}

/// Monte Carlo I(W; Y | X, Z^n).  Only the inputs are drawn: the integrand
/// does not depend on the labels, so the estimate is identical for every
/// prior mean given the same seed.
inline Estimate cmi_y_given_xzn(const LinearModelSpec& spec, Eigen::Index n, std::size_t mc_reps,
                                SeedSpec seed) {
  spec.validate();
  if (mc_reps < 1) throw std::invalid_argument("cmi_y_given_xzn: mc_reps must be >= 1");
  const auto values = parallel_map<double>(mc_reps, [&](std::size_t r) {
    Stream stream(seed.child(r));
    std::vector<Vector> xs;
    xs.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) xs.push_back(draw_input(spec.input_dist, stream));
    const Dataset data = make_dataset(spec, std::move(xs), Vector::Zero(n));
    return cmi_integrand(spec, data, draw_input(spec.input_dist, stream));
  });
  return prob::summarize(values);
}

}  // namespace erlab::bayes
