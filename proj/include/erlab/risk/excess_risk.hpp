// Monte Carlo excess risk
//   e(A, w) = E[ loss(A(Z^n, X), Y) - loss(f*_w(X), Y) ]
// for learners on the Gaussian linear model (squared loss) and on the
// threshold class (0-1 loss).  Each replicate draws fresh (Z^n, X, Y) and any
// learner randomness from its own stream and contributes the difference of
// the two losses.
#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "erlab/bayes/linear_model.hpp"
#include "erlab/prob/gaussian.hpp"
#include "erlab/prob/parallel.hpp"
#include "erlab/prob/random.hpp"
#include "erlab/prob/stats.hpp"
#include "erlab/vc/threshold.hpp"

namespace erlab::risk {

using bayes::Dataset;
using bayes::LinearModelSpec;
using prob::Gaussian;
using prob::SeedSpec;
using prob::Stream;

struct RiskEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t reps = 0;
  SeedSpec seed;
};

/// Learners for the Gaussian linear model.  Each carries the prior it uses,
/// which need not be the prior that generated W.
struct PosteriorSampling {
  Gaussian prior;
};
struct RidgeRegression {
  Gaussian prior;
};
struct BayesOptimal {
  Gaussian prior;
};
struct ConstantPredictor {
  Vector weights;
};

using LinearAlgorithm =
    std::variant<PosteriorSampling, RidgeRegression, BayesOptimal, ConstantPredictor>;

inline std::string describe(const LinearAlgorithm& alg) {
  return std::visit(
      [](const auto& a) -> std::string {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, PosteriorSampling>) {
          return "posterior_sampling";
        } else if constexpr (std::is_same_v<T, RidgeRegression>) {
          return "rls";
        } else if constexpr (std::is_same_v<T, BayesOptimal>) {
          return "bayes_optimal";
        } else {
          std::ostringstream os;
          os.precision(6);
          os << "constant_w=";
          for (Eigen::Index i = 0; i < a.weights.size(); ++i) os << (i ? ";" : "") << a.weights[i];
          return os.str();
        }
      },
      alg);
}

/// Finite mixture of parameter values.
struct DiscretePrior {
  std::vector<Vector> atoms;
  std::vector<double> weights;
};

using ParameterPrior = std::variant<Gaussian, DiscretePrior>;

inline Vector draw_parameter(const ParameterPrior& prior, Stream& stream) {
  if (const auto* g = std::get_if<Gaussian>(&prior)) return prob::GaussianSampler(*g).draw(stream);
  const auto& disc = std::get<DiscretePrior>(prior);
  if (disc.atoms.empty() || disc.atoms.size() != disc.weights.size()) {
    throw std::invalid_argument("DiscretePrior: atoms and weights must be non-empty and aligned");
  }
  const double u = stream.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < disc.atoms.size(); ++i) {
    acc += disc.weights[i];
    if (u < acc) return disc.atoms[i];
  }
  return disc.atoms.back();
}

namespace detail {

inline void require_reps(std::size_t reps) {
  if (reps < 2) throw std::invalid_argument("Monte Carlo risk estimates need reps >= 2");
}

template <class Fn>
std::vector<double> replicate(std::size_t reps, SeedSpec seed, Fn&& one) {
  return parallel_map<double>(reps, [&](std::size_t r) {
    Stream stream(seed.child(r));
    return one(stream);
  });
}

inline RiskEstimate to_risk(const std::vector<double>& values, SeedSpec seed) {
  const auto est = prob::summarize(values);
  return {est.mean, est.std_error, est.reps, seed};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Gaussian linear model

/// Prediction of `alg` at x after training on `data`.  Posterior sampling
/// reads dim(W) normals from `stream`; the other learners read nothing.
inline double predict(const LinearModelSpec& spec, const LinearAlgorithm& alg,
                      const Dataset& data, const Vector& x, Stream& stream) {
  const Vector phi = bayes::features(spec, x);
  return std::visit(
      [&](const auto& a) -> double {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, ConstantPredictor>) {
          if (a.weights.size() != spec.d) throw DimensionMismatch("constant predictor dimension");
          return a.weights.dot(phi);
        } else {
          const Gaussian post = bayes::posterior_under(a.prior, data, spec.sigma_e);
          if constexpr (std::is_same_v<T, PosteriorSampling>) {
            return prob::GaussianSampler(post).draw(stream).dot(phi);
          } else {
            return post.mean().dot(phi);
          }
        }
      },
      alg);
}

/// Draws W' from the posterior under P0 and returns <W', phi(x)>.
inline double run_posterior_sampling(const LinearModelSpec& spec, const Gaussian& p0,
                                     const Dataset& data, const Vector& x, SeedSpec seed) {
  Stream stream(seed);
  return predict(spec, PosteriorSampling{p0}, data, x, stream);
}

/// One replicate for true parameter w: training set, test point, learner
/// randomness, in that order.
inline double excess_loss_once(const LinearModelSpec& spec, const LinearAlgorithm& alg,
                               const Vector& w, Eigen::Index n, Stream& stream) {
  const Dataset data = bayes::generate(spec, w, n, stream);
  const Vector x = bayes::draw_input(spec.input_dist, stream);
  const double best = w.dot(bayes::features(spec, x));
  const double y = best + spec.sigma_e * stream.normal();
  const double pred = predict(spec, alg, data, x, stream);
  return (pred - y) * (pred - y) - (best - y) * (best - y);
}

inline RiskEstimate excess_risk_mc(const LinearModelSpec& spec, const LinearAlgorithm& alg,
                                   const Vector& w, Eigen::Index n, std::size_t reps,
                                   SeedSpec seed) {
  spec.validate();
  detail::require_reps(reps);
  if (w.size() != spec.d) throw DimensionMismatch("excess_risk_mc: dim(w) != d");
  return detail::to_risk(
      detail::replicate(reps, seed,
                        [&](Stream& s) { return excess_loss_once(spec, alg, w, n, s); }),
      seed);
}

/// Per-replicate Bayes excess losses with W ~ prior drawn first.
inline std::vector<double> bayes_excess_samples(const LinearModelSpec& spec,
                                                const LinearAlgorithm& alg,
                                                const ParameterPrior& prior, Eigen::Index n,
                                                std::size_t reps, SeedSpec seed) {
  spec.validate();
  detail::require_reps(reps);
  return detail::replicate(reps, seed, [&](Stream& s) {
    const Vector w = draw_parameter(prior, s);
    if (w.size() != spec.d) throw DimensionMismatch("bayes_excess_risk_mc: prior dimension");
    return excess_loss_once(spec, alg, w, n, s);
  });
}

inline RiskEstimate bayes_excess_risk_mc(const LinearModelSpec& spec, const LinearAlgorithm& alg,
                                         const ParameterPrior& prior, Eigen::Index n,
                                         std::size_t reps, SeedSpec seed) {
  return detail::to_risk(bayes_excess_samples(spec, alg, prior, n, reps, seed), seed);
}

/// Paired estimate of Bayes excess risk difference (first - second).  Both
/// learners see the same W, training set, test point and label in every
/// replicate.
inline RiskEstimate paired_bayes_difference(const LinearModelSpec& spec,
                                            const LinearAlgorithm& first,
                                            const LinearAlgorithm& second,
                                            const ParameterPrior& prior, Eigen::Index n,
                                            std::size_t reps, SeedSpec seed) {
  const auto a = bayes_excess_samples(spec, first, prior, n, reps, seed);
  const auto b = bayes_excess_samples(spec, second, prior, n, reps, seed);
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  return detail::to_risk(diff, seed);
}

/// Closed-form excess risk when phi == 1 (d = 1), where the training set
/// enters only through its label mean Ybar ~ N(w, sigma_e^2 / n).
inline double exact_excess_constant_features(const LinearModelSpec& spec,
                                             const LinearAlgorithm& alg, double w,
                                             Eigen::Index n) {
  const auto* mono = std::get_if<bayes::MonomialFeatures>(&spec.feature_map);
  if (spec.d != 1 || mono == nullptr || mono->degree != 0) {
    throw std::invalid_argument("closed-form excess risk needs constant features (d = 1)");
  }
  const double se2 = spec.sigma_e * spec.sigma_e;
  const auto nn = static_cast<double>(n);
  return std::visit(
      [&](const auto& a) -> double {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, ConstantPredictor>) {
          return (a.weights[0] - w) * (a.weights[0] - w);
        } else {
          const double m0 = a.prior.mean()[0];
          const double s0 = a.prior.cov()(0, 0);
          double mse = 0.0;
          double post_var = 0.0;
          if (s0 <= 0.0) {
            mse = (m0 - w) * (m0 - w);
          } else {
            const double lam0 = se2 / s0;
            mse = (nn * se2 + lam0 * lam0 * (m0 - w) * (m0 - w)) / ((nn + lam0) * (nn + lam0));
            post_var = se2 / (nn + lam0);
          }
          if constexpr (std::is_same_v<T, PosteriorSampling>) {
            return mse + post_var;
          } else {
            return mse;
          }
        }
      },
      alg);
}

// ---------------------------------------------------------------------------
// Threshold class

namespace detail {
inline int draw_category(const std::vector<double>& p, Stream& stream) {
  const double u = stream.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.size()) - 1;
}

inline double threshold_loss_once(const vc::ThresholdClassSpec& spec,
                                  const vc::ThresholdAlgorithm& alg, int t, long n,
                                  Stream& stream) {
  std::vector<int> xs(static_cast<std::size_t>(n));
  std::vector<int> ys(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    xs[static_cast<std::size_t>(i)] = draw_category(spec.px, stream) + 1;
    ys[static_cast<std::size_t>(i)] = vc::label(t, xs[static_cast<std::size_t>(i)]);
  }
  const int x = draw_category(spec.px, stream) + 1;
  const int pred = stream.uniform() < vc::prob_predict_one(spec, alg, xs, ys, x) ? 1 : 0;
  return pred == vc::label(t, x) ? 0.0 : 1.0;
}
}  // namespace detail

inline RiskEstimate excess_risk_mc(const vc::ThresholdClassSpec& spec,
                                   const vc::ThresholdAlgorithm& alg, int t, long n,
                                   std::size_t reps, SeedSpec seed) {
  spec.validate();
  detail::require_reps(reps);
  if (t < 1 || t > spec.num_thresholds()) throw std::invalid_argument("threshold out of range");
  return detail::to_risk(detail::replicate(reps, seed,
                                           [&](Stream& s) {
                                             return detail::threshold_loss_once(spec, alg, t, n, s);
                                           }),
                         seed);
}

/// T ~ prior (index t-1), then as excess_risk_mc.
inline RiskEstimate bayes_excess_risk_mc(const vc::ThresholdClassSpec& spec,
                                         const vc::ThresholdAlgorithm& alg,
                                         const std::vector<double>& prior, long n,
                                         std::size_t reps, SeedSpec seed) {
  spec.validate();
  detail::require_reps(reps);
  vc::ThresholdClassSpec::check_simplex(prior, static_cast<std::size_t>(spec.num_thresholds()),
                                        "prior");
  return detail::to_risk(detail::replicate(reps, seed,
                                           [&](Stream& s) {
                                             const int t = detail::draw_category(prior, s) + 1;
                                             return detail::threshold_loss_once(spec, alg, t, n, s);
                                           }),
                         seed);
}

}  // namespace erlab::risk
