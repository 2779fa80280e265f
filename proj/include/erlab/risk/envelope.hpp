// Empirical check of the sub-exponential envelope for the posterior-sampling
// squared loss.  At a fixed (z^n, x) the loss is L = (<W', phi(x)> - Y)^2 with
//   W' ~ posterior under the learner's prior P0,
//   W  ~ posterior under the true prior P_W,   Y = <W, phi(x)> + E.
// The report compares log E exp(-lambda (L - E L)) with
// phi(lambda) = (16 sigma_w^2 + 8 sigma_e^2) lambda^2.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "erlab/bayes/linear_model.hpp"
#include "erlab/bounds/legendre.hpp"
#include "erlab/prob/gaussian.hpp"
#include "erlab/prob/parallel.hpp"
#include "erlab/prob/random.hpp"
#include "erlab/prob/stats.hpp"

namespace erlab::risk {

struct EnvelopePoint {
  bayes::Dataset data;
  Vector x;
};

struct EnvelopeRow {
  std::size_t point = 0;
  double lambda = 0.0;
  double mc_cgf = 0.0;
  double std_error = 0.0;
  double exact_cgf = 0.0;  ///< closed form, since <W', phi> - Y is Gaussian here
  double bound = 0.0;
  bool violated = false;
};

struct EnvelopeReport {
  std::vector<EnvelopeRow> rows;
  std::size_t violations = 0;
};

/// log E exp(-lambda (D^2 - E D^2)) for D ~ N(m, s2).
inline double squared_gaussian_cgf(double m, double s2, double lambda) {
  const double a = 1.0 + 2.0 * lambda * s2;
  return lambda * s2 - 0.5 * std::log(a) + 2.0 * lambda * lambda * m * m * s2 / a;
}

/// `count` points: W ~ P_W, z^n from the model, fresh x.
inline std::vector<EnvelopePoint> random_envelope_points(const bayes::LinearModelSpec& spec,
                                                         const prob::Gaussian& true_prior,
                                                         Eigen::Index n, std::size_t count,
                                                         prob::SeedSpec seed) {
  std::vector<EnvelopePoint> pts;
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    prob::Stream s(seed.child(i));
    const Vector w = prob::GaussianSampler(true_prior).draw(s);
    auto data = bayes::generate(spec, w, n, s);
    auto x = bayes::draw_input(spec.input_dist, s);
    pts.push_back({std::move(data), std::move(x)});
  }
  return pts;
}

/// MC estimate at every (point, lambda).  A row is a violation when
/// mc_cgf > bound + num_se * std_error.  The standard error is the delta-method
/// value sd(e) / (mean(e) sqrt(draws)) for e = exp(-lambda (L - Lbar)).
inline EnvelopeReport envelope_check(const bayes::LinearModelSpec& spec,
                                     const prob::Gaussian& true_prior,
                                     const prob::Gaussian& p0,
                                     const std::vector<EnvelopePoint>& points,
                                     const std::vector<double>& lambdas, std::size_t draws,
                                     prob::SeedSpec seed, double num_se = 3.0) {
  spec.validate();
  if (draws < 2) throw std::invalid_argument("envelope_check: draws must be >= 2");
  const auto env = bounds::subexponential_envelope(spec.sigma_w, spec.sigma_e);
  for (double lam : lambdas) {
    if (!(lam >= 0.0) || !(lam < env.b)) {
      throw std::invalid_argument("envelope_check: lambda outside [0, b)");
    }
  }
  auto per_point = parallel_map<std::vector<EnvelopeRow>>(points.size(), [&](std::size_t p) {
    const auto& pt = points[p];
    const Vector phi = bayes::features(spec, pt.x);
    const auto post0 = bayes::posterior_under(p0, pt.data, spec.sigma_e);
    const auto postw = bayes::posterior_under(true_prior, pt.data, spec.sigma_e);
    const prob::GaussianSampler s0(post0);
    const prob::GaussianSampler sw(postw);
    prob::Stream stream(seed.child(p));
    std::vector<double> loss(draws);
    for (std::size_t i = 0; i < draws; ++i) {
      const double pred = s0.draw(stream).dot(phi);
      const double y = sw.draw(stream).dot(phi) + spec.sigma_e * stream.normal();
      loss[i] = (pred - y) * (pred - y);
    }
    const double lbar = prob::summarize(loss).mean;
    const double m = (post0.mean() - postw.mean()).dot(phi);
    const double s2 = phi.dot((post0.cov() + postw.cov()) * phi) + spec.sigma_e * spec.sigma_e;

    std::vector<EnvelopeRow> rows;
    std::vector<double> e(draws);
    for (double lam : lambdas) {
      for (std::size_t i = 0; i < draws; ++i) e[i] = std::exp(-lam * (loss[i] - lbar));
      const auto est = prob::summarize(e);
      EnvelopeRow row;
      row.point = p;
      row.lambda = lam;
      row.mc_cgf = std::log(est.mean);
      row.std_error = est.std_error / est.mean;
      row.exact_cgf = squared_gaussian_cgf(m, s2, lam);
      row.bound = env.q * lam * lam;
      row.violated = row.mc_cgf > row.bound + num_se * row.std_error;
      rows.push_back(row);
    }
    return rows;
  });
  EnvelopeReport report;
  for (auto& rows : per_point) {
    for (auto& r : rows) {
      report.violations += r.violated ? 1 : 0;
      report.rows.push_back(r);
    }
  }
  return report;
}

}  // namespace erlab::risk
