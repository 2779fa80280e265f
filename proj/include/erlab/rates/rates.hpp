// Asymptotic diagnostics: the large-n expansion of I(W; Z^n) on the conjugate
// Gaussian location family, log-log rate fits, and the individual lower rate.
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "erlab/bounds/bounds.hpp"
#include "erlab/prob/stats.hpp"

namespace erlab::rates {

/// W ~ N(0, sigma_w^2), Z | W ~ N(W, sigma^2).  Returns, per n,
///   I(W; Z^n) - [ 1/2 log(n / 2 pi e) + h(W) + 1/2 log J ],   J = 1/sigma^2,
/// where I(W; Z^n) = 1/2 log(1 + n sigma_w^2 / sigma^2).
inline std::vector<double> lemma2_residual(double sigma_w, double sigma,
                                           const std::vector<long>& ns) {
  if (!(sigma_w > 0.0) || !(sigma > 0.0)) {
    throw std::invalid_argument("lemma2_residual: scales must be > 0");
  }
  const double two_pi_e = 2.0 * std::numbers::pi * std::numbers::e;
  const double h_w = 0.5 * std::log(two_pi_e * sigma_w * sigma_w);
  const double half_log_j = -std::log(sigma);
  std::vector<double> out;
  out.reserve(ns.size());
  for (long n : ns) {
    if (n < 1) throw std::invalid_argument("lemma2_residual: n must be >= 1");
    const auto nn = static_cast<double>(n);
    const double exact = 0.5 * std::log1p(nn * sigma_w * sigma_w / (sigma * sigma));
    const double approx = 0.5 * std::log(nn / two_pi_e) + h_w + half_log_j;
    out.push_back(exact - approx);
  }
  return out;
}

struct RateFit {
  std::vector<double> ns;
  std::vector<double> values;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least squares of log(value) on log(n).
inline RateFit fit_rate(const std::vector<double>& ns, const std::vector<double>& values) {
  if (ns.size() != values.size() || ns.size() < 2) {
    throw std::invalid_argument("fit_rate: need >= 2 aligned points");
  }
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(ns[i] > 0.0) || (i > 0 && !(ns[i] > ns[i - 1]))) {
      throw std::invalid_argument("fit_rate: ns must be positive and strictly increasing");
    }
    if (!(values[i] > 0.0)) throw std::invalid_argument("fit_rate: values must be > 0");
  }
  const auto m = static_cast<double>(ns.size());
  prob::CompensatedSum sx;
  prob::CompensatedSum sy;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    sx.add(std::log(ns[i]));
    sy.add(std::log(values[i]));
  }
  const double mx = sx.value() / m;
  const double my = sy.value() / m;
  prob::CompensatedSum sxx;
  prob::CompensatedSum sxy;
  prob::CompensatedSum syy;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double dx = std::log(ns[i]) - mx;
    const double dy = std::log(values[i]) - my;
    sxx.add(dx * dx);
    sxy.add(dx * dy);
    syy.add(dy * dy);
  }
  RateFit fit{ns, values};
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy.value() > 0.0 ? (sxy.value() * sxy.value()) / (sxx.value() * syy.value()) : 1.0;
  return fit;
}

/// (d / (n pi)) exp(-(2/d) E log|J|), with the o(1) term dropped.  log|J| is
/// taken in the convention under which I(W; Z^n) = d/2 log(n / 2 pi e) + h(W)
/// + E log|J| + o(1) holds, i.e. half the log-determinant of the Fisher
/// information; the bound is then (d / (n pi)) E-geometric det(F)^(-1/d).
inline bounds::BoundReport lower_rate_bound(int d, double expected_log_det_j, long n) {
  if (d < 1 || n < 1) throw std::invalid_argument("lower_rate_bound: need d >= 1, n >= 1");
  const double dd = d;
  const double value = dd / (static_cast<double>(n) * std::numbers::pi) *
                       std::exp(-(2.0 / dd) * expected_log_det_j);
  return {bounds::BoundName::lower_rate,
          {{"d", dd}, {"expected_log_det_J", expected_log_det_j}, {"n", static_cast<double>(n)}},
          value};
}

}  // namespace erlab::rates
