// Cumulant envelopes, their Legendre duals on [0, b), and the generalized
// inverse of the dual.
//
//   phi*(g)      = sup_{0 <= lambda < b} lambda g - phi(lambda)
//   phi*^{-1}(y) = sup { g : phi*(g) <= y }
//
// Quadratic envelopes phi(lambda) = q lambda^2 have closed forms; arbitrary
// convex envelopes go through bracketed one-dimensional search, which also
// serves as an independent check of the closed forms.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

namespace erlab::bounds {

/// phi(lambda) = q lambda^2 on [0, b).
struct QuadraticEnvelope {
  double q = 1.0;
  double b = 1.0;
};

/// Arbitrary convex non-decreasing phi on [0, b) with phi(0) = 0.
struct GeneralEnvelope {
  std::function<double(double)> phi;
  double b = 1.0;

  /// Piecewise-linear interpolation through (lambdas[i], values[i]).
  /// lambdas must start at 0 and be strictly increasing; b = lambdas.back().
  static GeneralEnvelope tabulated(std::vector<double> lambdas, std::vector<double> values) {
    if (lambdas.size() < 2 || lambdas.size() != values.size() || lambdas.front() != 0.0) {
      throw std::invalid_argument("tabulated envelope: need >= 2 knots starting at 0");
    }
    for (std::size_t i = 1; i < lambdas.size(); ++i) {
      if (!(lambdas[i] > lambdas[i - 1])) {
        throw std::invalid_argument("tabulated envelope: knots must increase");
      }
    }
    const double b = lambdas.back();
    auto fn = [xs = std::move(lambdas), ys = std::move(values)](double lam) {
      if (lam <= xs.front()) return ys.front();
      if (lam >= xs.back()) return ys.back();
      const auto it = std::upper_bound(xs.begin(), xs.end(), lam);
      const auto hi = static_cast<std::size_t>(it - xs.begin());
      const double t = (lam - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
      return ys[hi - 1] + t * (ys[hi] - ys[hi - 1]);
    };
    return {std::move(fn), b};
  }
};

using CumulantEnvelope = std::variant<QuadraticEnvelope, GeneralEnvelope>;

/// Envelope of the squared-loss cumulant of posterior sampling in the
/// Gaussian linear model with ||phi(x)|| <= 1:
///   phi(lambda) = (16 sigma_w^2 + 8 sigma_e^2) lambda^2,
///   b = 1 / (32 sigma_w^2 + 16 sigma_e^2).
inline QuadraticEnvelope subexponential_envelope(double sigma_w, double sigma_e) {
  const double sw2 = sigma_w * sigma_w;
  const double se2 = sigma_e * sigma_e;
  return {16.0 * sw2 + 8.0 * se2, 1.0 / (32.0 * sw2 + 16.0 * se2)};
}

inline double envelope_value(const CumulantEnvelope& env, double lambda) {
  if (const auto* quad = std::get_if<QuadraticEnvelope>(&env)) return quad->q * lambda * lambda;
  return std::get<GeneralEnvelope>(env).phi(lambda);
}

inline double envelope_domain(const CumulantEnvelope& env) {
  return std::visit([](const auto& e) { return e.b; }, env);
}

/// sup_{lambda in [0, b]} lambda * gamma - phi(lambda) by a 64-cell grid scan
/// followed by golden-section refinement around the best cell.  Endpoints are
/// always compared explicitly so boundary maximizers are exact.
inline double numeric_legendre_dual(const std::function<double(double)>& phi, double b,
                                    double gamma) {
  auto objective = [&](double lam) { return lam * gamma - phi(lam); };
  constexpr int kCells = 64;
  int best = 0;
  double best_val = objective(0.0);
  for (int i = 1; i <= kCells; ++i) {
    const double v = objective(b * i / kCells);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double lo = b * std::max(0, best - 1) / kCells;
  double hi = b * std::min(kCells, best + 1) / kCells;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-13 * b; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1);
    }
  }
  return std::max({best_val, f1, f2, objective(0.5 * (lo + hi)), objective(b)});
}

/// sup { gamma >= 0 : dual(gamma) <= y } by doubling and bisection, for a
/// non-decreasing dual with dual(0) = 0.
template <class Dual>
double numeric_dual_inverse(Dual&& dual, double y) {
  if (!(y >= 0.0)) throw std::invalid_argument("legendre_dual_inverse: argument must be >= 0");
  double lo = 0.0;
  double hi = 1.0;
  while (dual(hi) <= y) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return std::numeric_limits<double>::infinity();
  }
  for (int it = 0; it < 400 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (dual(mid) <= y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

/// phi*(gamma).  Quadratic: 0 for gamma <= 0, gamma^2/(4q) up to gamma = 2qb,
/// then b gamma - q b^2.
inline double legendre_dual(const CumulantEnvelope& env, double gamma) {
  if (const auto* quad = std::get_if<QuadraticEnvelope>(&env)) {
    if (gamma <= 0.0) return 0.0;
    if (gamma <= 2.0 * quad->q * quad->b) return gamma * gamma / (4.0 * quad->q);
    return quad->b * gamma - quad->q * quad->b * quad->b;
  }
  const auto& gen = std::get<GeneralEnvelope>(env);
  return numeric_legendre_dual(gen.phi, gen.b, gamma);
}

/// phi*^{-1}(y) for y >= 0.  Quadratic: sqrt(4 q y) up to y = q b^2, then
/// (y + q b^2) / b.  For the sub-exponential envelope these read
/// sqrt((64 sw^2 + 32 se^2) y) and (32 sw^2 + 16 se^2) y + 1/2.
inline double legendre_dual_inverse(const CumulantEnvelope& env, double y) {
  if (!(y >= 0.0)) throw std::invalid_argument("legendre_dual_inverse: argument must be >= 0");
  if (const auto* quad = std::get_if<QuadraticEnvelope>(&env)) {
    const double knee = quad->q * quad->b * quad->b;
    if (y <= knee) return std::sqrt(4.0 * quad->q * y);
    return (y + knee) / quad->b;
  }
  const auto& gen = std::get<GeneralEnvelope>(env);
  return numeric_dual_inverse(
      [&](double g) { return numeric_legendre_dual(gen.phi, gen.b, g); }, y);
}

}  // namespace erlab::bounds
