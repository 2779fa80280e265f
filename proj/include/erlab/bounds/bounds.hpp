// Excess-risk bound evaluators.  Each returns a BoundReport carrying its
// name, the named inputs it consumed, and the bound value, so experiment
// reports can be serialized without re-deriving anything.
#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "erlab/bounds/legendre.hpp"
#include "erlab/prob/gaussian.hpp"

namespace erlab::bounds {

enum class BoundName { thm4a, thm4b, thm4c, thm5a, thm5b, thm5c, thm7, thm10, lower_rate };

inline std::string_view to_string(BoundName name) {
  switch (name) {
    case BoundName::thm4a: return "thm4a";
    case BoundName::thm4b: return "thm4b";
    case BoundName::thm4c: return "thm4c";
    case BoundName::thm5a: return "thm5a";
    case BoundName::thm5b: return "thm5b";
    case BoundName::thm5c: return "thm5c";
    case BoundName::thm7: return "thm7";
    case BoundName::thm10: return "thm10";
    case BoundName::lower_rate: return "lower_rate";
  }
  return "unknown";
}

struct BoundReport {
  BoundName name;
  std::map<std::string, double> inputs;
  double value = 0.0;
};

/// Loss regimes of the information bounds:
///   squared    - squared loss with ||y||^2 <= B           (factor 2B)
///   realizable - loss in [0, B], zero loss for f*_w       (factor 3B)
///   bounded    - any loss in [0, B]                       (B sqrt(I/2))
enum class LossRegime { squared, realizable, bounded };

namespace detail {
inline double regime_value(LossRegime regime, double scale, double info) {
  switch (regime) {
    case LossRegime::squared: return 2.0 * scale * info;
    case LossRegime::realizable: return 3.0 * scale * info;
    case LossRegime::bounded: return scale * std::sqrt(info / 2.0);
  }
  throw std::invalid_argument("unknown loss regime");
}

inline void require_nonneg(double v, const char* what) {
  if (!(v >= 0.0)) throw std::invalid_argument(std::string(what) + " must be >= 0");
}
}  // namespace detail

/// Bayesian bound from I(W; Y | X, Z^n).
inline BoundReport bayes_excess_bound(LossRegime regime, double loss_bound, double cmi) {
  detail::require_nonneg(loss_bound, "B");
  detail::require_nonneg(cmi, "cmi");
  static constexpr BoundName names[] = {BoundName::thm4a, BoundName::thm4b, BoundName::thm4c};
  return {names[static_cast<int>(regime)],
          {{"B", loss_bound}, {"cmi", cmi}},
          detail::regime_value(regime, loss_bound, cmi)};
}

/// Minimax bound from a capacity bound kappa_n on the channel W -> Z^n:
/// the Bayesian bound evaluated at cmi = kappa_n / n.
inline BoundReport minimax_capacity_bound(LossRegime regime, double loss_bound, double kappa_n,
                                          long n) {
  detail::require_nonneg(loss_bound, "B");
  detail::require_nonneg(kappa_n, "kappa_n");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  static constexpr BoundName names[] = {BoundName::thm5a, BoundName::thm5b, BoundName::thm5c};
  return {names[static_cast<int>(regime)],
          {{"B", loss_bound}, {"kappa_n", kappa_n}, {"n", static_cast<double>(n)}},
          detail::regime_value(regime, loss_bound, kappa_n / static_cast<double>(n))};
}

// ---------------------------------------------------------------------------
// Prior families

enum class FamilyKind { gaussian_mean_ball };

/// { N(mu, sigma_w^2 I) : ||mu - center.mean|| <= c } around center
/// N(center.mean, sigma_w^2 I).
struct PriorFamily {
  FamilyKind kind = FamilyKind::gaussian_mean_ball;
  prob::Gaussian center;
  double c = 0.0;
};

/// sup over the family of KL(P_W || center).  For the Gaussian mean ball,
/// KL(N(mu, s^2 I) || N(0, s^2 I)) = ||mu||^2 / (2 s^2), maximized at
/// ||mu|| = c.
inline double family_radius(const PriorFamily& fam) {
  if (fam.kind != FamilyKind::gaussian_mean_ball) {
    throw std::invalid_argument("family_radius: unsupported family kind");
  }
  if (!(fam.c >= 0.0)) throw std::invalid_argument("family_radius: c must be >= 0");
  const Matrix& cov = fam.center.cov();
  const double s2 = cov(0, 0);
  if (!(s2 > 0.0) ||
      !cov.isApprox(s2 * Matrix::Identity(cov.rows(), cov.cols()), 1e-12)) {
    throw std::invalid_argument("family_radius: center must be isotropic with positive variance");
  }
  return fam.c * fam.c / (2.0 * s2);
}

/// Posterior-sampling bound  phi*^{-1}(r / n + sup I(W; Y | X, Z^n)).
inline BoundReport posterior_sampling_bound(const CumulantEnvelope& env, const PriorFamily& fam,
                                            double cmi_sup, long n) {
  detail::require_nonneg(cmi_sup, "cmi_sup");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const double r = family_radius(fam);
  const double arg = r / static_cast<double>(n) + cmi_sup;
  return {BoundName::thm7,
          {{"r", r}, {"cmi_sup", cmi_sup}, {"n", static_cast<double>(n)}, {"argument", arg}},
          legendre_dual_inverse(env, arg)};
}

/// Gaussian-model posterior-sampling bound  phi*^{-1}((I(W; Z^n) + r) / n).
inline BoundReport gaussian_ps_bound(const CumulantEnvelope& env, const PriorFamily& fam,
                                     double mi_wzn, long n) {
  detail::require_nonneg(mi_wzn, "mi_wzn");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const double r = family_radius(fam);
  const double arg = (mi_wzn + r) / static_cast<double>(n);
  return {BoundName::thm10,
          {{"r", r}, {"mi_wzn", mi_wzn}, {"n", static_cast<double>(n)}, {"argument", arg}},
          legendre_dual_inverse(env, arg)};
}

}  // namespace erlab::bounds
