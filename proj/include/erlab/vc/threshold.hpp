// Exact analysis of the realizable threshold class on X = {1..k}:
// h_t(x) = 1[x >= t] for t in {1..k+1}, Y = h_T(X).
//
// Everything here is computed by full enumeration of input sequences, so the
// information chain and the excess-risk inequalities can be checked without
// sampling error.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "erlab/prob/parallel.hpp"
#include "erlab/prob/stats.hpp"

namespace erlab::vc {

/// Requested enumeration would exceed the exactness budget.
struct EnumerationTooLarge : std::length_error {
  using std::length_error::length_error;
};

/// (k+1) * k^(n+1) must stay at or below this.
inline constexpr double kMaxEnumerationStates = 1e7;

inline constexpr int kThresholdVcDim = 1;

struct ThresholdClassSpec {
  int k = 2;
  std::vector<double> px;       ///< P(X = x), x = 1..k, at index x-1
  std::vector<double> prior_t;  ///< P(T = t), t = 1..k+1, at index t-1

  static ThresholdClassSpec uniform(int k) {
    return {k, std::vector<double>(static_cast<std::size_t>(k), 1.0 / k),
            std::vector<double>(static_cast<std::size_t>(k + 1), 1.0 / (k + 1))};
  }

  [[nodiscard]] int num_thresholds() const noexcept { return k + 1; }

  void validate() const {
    if (k < 1) throw std::invalid_argument("ThresholdClassSpec: k must be >= 1");
    check_simplex(px, static_cast<std::size_t>(k), "px");
    check_simplex(prior_t, static_cast<std::size_t>(k + 1), "prior_t");
  }

  static void check_simplex(const std::vector<double>& p, std::size_t size, const char* what) {
    if (p.size() != size) {
      throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(size) +
                                  " entries");
    }
    double total = 0.0;
    for (double v : p) {
      if (!(v >= 0.0)) throw std::invalid_argument(std::string(what) + ": negative entry");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::invalid_argument(std::string(what) + ": entries must sum to 1");
    }
  }
};

inline int label(int t, int x) noexcept { return x >= t ? 1 : 0; }

/// Bitmask of h_t over the points (bit i = label of points[i]).
inline std::uint64_t labeling(int t, const std::vector<int>& points) {
  std::uint64_t mask = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (label(t, points[i])) mask |= std::uint64_t{1} << i;
  }
  return mask;
}

/// Number of distinct labelings the class induces on `points`.
inline std::size_t growth_count(const ThresholdClassSpec& spec, const std::vector<int>& points) {
  if (points.size() > 64) throw std::invalid_argument("growth_count: at most 64 points");
  std::set<std::uint64_t> seen;
  for (int t = 1; t <= spec.num_thresholds(); ++t) seen.insert(labeling(t, points));
  return seen.size();
}

/// (1/n) log(e n^dvc).
inline double sauer_bound(int dvc, long n) {
  if (n < 1) throw std::invalid_argument("sauer_bound: n must be >= 1");
  if (dvc < 0) throw std::invalid_argument("sauer_bound: dvc must be >= 0");
  return (1.0 + dvc * std::log(static_cast<double>(n))) / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Enumeration

namespace detail {

inline void guard_size(const ThresholdClassSpec& spec, long n) {
  if (n < 0) throw std::invalid_argument("sample size must be >= 0");
  const double states =
      static_cast<double>(spec.k + 1) * std::pow(static_cast<double>(spec.k), n + 1);
  if (states > kMaxEnumerationStates) {
    throw EnumerationTooLarge("enumeration of k=" + std::to_string(spec.k) +
                              ", n=" + std::to_string(n) + " needs " + std::to_string(states) +
                              " states (limit 1e7)");
  }
}

/// Calls fn(xs, prob) for every x^m in {1..k}^m.  Blocks of sequences are
/// processed in parallel; each block sums into its own compensated
/// accumulator and blocks are combined in index order.
template <class Fn>
double enumerate_sum(const ThresholdClassSpec& spec, long m, Fn&& fn) {
  std::uint64_t total = 1;
  for (long i = 0; i < m; ++i) total *= static_cast<std::uint64_t>(spec.k);
  constexpr std::uint64_t kBlock = 4096;
  const std::uint64_t blocks = (total + kBlock - 1) / kBlock;
  const auto partial = parallel_map<double>(blocks, [&](std::size_t b) {
    prob::CompensatedSum acc;
    std::vector<int> xs(static_cast<std::size_t>(m));
    const std::uint64_t end = std::min<std::uint64_t>(total, (b + 1) * kBlock);
    for (std::uint64_t idx = b * kBlock; idx < end; ++idx) {
      std::uint64_t rest = idx;
      double p = 1.0;
      for (long i = 0; i < m; ++i) {
        const int x = static_cast<int>(rest % static_cast<std::uint64_t>(spec.k));
        rest /= static_cast<std::uint64_t>(spec.k);
        xs[static_cast<std::size_t>(i)] = x + 1;
        p *= spec.px[static_cast<std::size_t>(x)];
      }
      if (p > 0.0) acc.add(fn(xs, p));
    }
    return acc.value();
  });
  prob::CompensatedSum sum;
  for (double v : partial) sum.add(v);
  return sum.value();
}

/// Entropy (nats) of the labeling of the first `count` points under prior_t.
inline double labeling_entropy(const ThresholdClassSpec& spec, const std::vector<int>& xs,
                               std::size_t count) {
  std::map<std::uint64_t, double> mass;
  for (int t = 1; t <= spec.num_thresholds(); ++t) {
    const double w = spec.prior_t[static_cast<std::size_t>(t - 1)];
    if (w <= 0.0) continue;
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < count; ++i) {
      if (label(t, xs[i])) mask |= std::uint64_t{1} << i;
    }
    mass[mask] += w;
  }
  double h = 0.0;
  for (const auto& [mask, p] : mass) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace detail

/// I(T; Y^n | X^n) = sum_{x^n} P(x^n) H(Y^n | X^n = x^n), exact.
inline double exact_cmi_yn(const ThresholdClassSpec& spec, long n) {
  spec.validate();
  detail::guard_size(spec, n);
  if (n == 0) return 0.0;
  return detail::enumerate_sum(spec, n, [&](const std::vector<int>& xs, double p) {
    return p * detail::labeling_entropy(spec, xs, xs.size());
  });
}

/// I(T; Y | X, Z^n) = I(T; Y^{n+1} | X^{n+1}) - I(T; Y^n | X^{n+1}), exact.
inline double exact_cmi_test(const ThresholdClassSpec& spec, long n) {
  spec.validate();
  detail::guard_size(spec, n);
  return detail::enumerate_sum(spec, n + 1, [&](const std::vector<int>& xs, double p) {
    const auto m = static_cast<std::size_t>(n);
    return p * (detail::labeling_entropy(spec, xs, m + 1) - detail::labeling_entropy(spec, xs, m));
  });
}

// ---------------------------------------------------------------------------
// Learners

/// Consistent thresholds for a realizable sample form the interval [lo, hi].
struct VersionSpace {
  int lo = 1;
  int hi = 1;
};

inline VersionSpace version_space(int k, const std::vector<int>& xs, const std::vector<int>& ys) {
  int max_negative = 0;
  int min_positive = k + 1;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ys[i]) {
      min_positive = std::min(min_positive, xs[i]);
    } else {
      max_negative = std::max(max_negative, xs[i]);
    }
  }
  return {max_negative + 1, min_positive};
}

/// Posterior over thresholds: the prior restricted to the version space and
/// renormalized, or uniform on it when the prior gives it no mass.
inline std::vector<double> threshold_posterior(const std::vector<double>& prior,
                                               VersionSpace vs) {
  std::vector<double> post(prior.size(), 0.0);
  double mass = 0.0;
  for (int t = vs.lo; t <= vs.hi; ++t) mass += prior[static_cast<std::size_t>(t - 1)];
  const int width = vs.hi - vs.lo + 1;
  if (width <= 0) throw std::invalid_argument("threshold_posterior: empty version space");
  for (int t = vs.lo; t <= vs.hi; ++t) {
    post[static_cast<std::size_t>(t - 1)] =
        mass > 0.0 ? prior[static_cast<std::size_t>(t - 1)] / mass : 1.0 / width;
  }
  return post;
}

/// Draw T' from the posterior and predict h_{T'}(x).
struct ThresholdPosteriorSampling {
  std::vector<double> prior;
};

/// Predict the posterior-majority label; exact ties predict 1 with
/// probability 1/2.
struct ThresholdBayesOptimal {
  std::vector<double> prior;
};

/// Ignores the data and predicts h_t.
struct FixedThreshold {
  int t = 1;
};

/// Ignores the data and predicts labels[x-1].
struct LabelTable {
  std::vector<int> labels;
};

using ThresholdAlgorithm =
    std::variant<ThresholdPosteriorSampling, ThresholdBayesOptimal, FixedThreshold, LabelTable>;

inline std::string describe(const ThresholdAlgorithm& alg) {
  return std::visit(
      [](const auto& a) -> std::string {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, ThresholdPosteriorSampling>) {
          return "posterior_sampling";
        } else if constexpr (std::is_same_v<T, ThresholdBayesOptimal>) {
          return "bayes_optimal";
        } else if constexpr (std::is_same_v<T, FixedThreshold>) {
          return "constant_t" + std::to_string(a.t);
        } else {
          std::string s = "table_";
          for (int l : a.labels) s += std::to_string(l);
          return s;
        }
      },
      alg);
}

/// Probability that the learner outputs label 1 at x after seeing (xs, ys).
inline double prob_predict_one(const ThresholdClassSpec& spec, const ThresholdAlgorithm& alg,
                               const std::vector<int>& xs, const std::vector<int>& ys, int x) {
  auto posterior_one = [&](const std::vector<double>& prior) {
    if (static_cast<int>(prior.size()) != spec.num_thresholds()) {
      throw std::invalid_argument("threshold learner prior must have k+1 entries");
    }
    const auto post = threshold_posterior(prior, version_space(spec.k, xs, ys));
    double p = 0.0;
    for (int t = 1; t <= std::min(x, spec.k + 1); ++t) p += post[static_cast<std::size_t>(t - 1)];
    return p;
  };
  return std::visit(
      [&](const auto& a) -> double {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, ThresholdPosteriorSampling>) {
          return posterior_one(a.prior);
        } else if constexpr (std::is_same_v<T, ThresholdBayesOptimal>) {
          const double p = posterior_one(a.prior);
          if (std::abs(p - 0.5) <= 1e-12) return 0.5;
          return p > 0.5 ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, FixedThreshold>) {
          return static_cast<double>(label(a.t, x));
        } else {
          if (static_cast<int>(a.labels.size()) != spec.k) {
            throw std::invalid_argument("LabelTable needs k labels");
          }
          return a.labels[static_cast<std::size_t>(x - 1)] ? 1.0 : 0.0;
        }
      },
      alg);
}

/// Exact expected 0-1 excess risk of `alg` when the true threshold is t.
/// Realizability makes the optimal loss zero, so this is the expected loss.
inline double exact_excess(const ThresholdClassSpec& spec, const ThresholdAlgorithm& alg, int t,
                           long n) {
  spec.validate();
  detail::guard_size(spec, n);
  if (t < 1 || t > spec.num_thresholds()) throw std::invalid_argument("threshold out of range");
  auto risk_given = [&](const std::vector<int>& xs) {
    std::vector<int> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = label(t, xs[i]);
    prob::CompensatedSum loss;
    for (int x = 1; x <= spec.k; ++x) {
      const double w = spec.px[static_cast<std::size_t>(x - 1)];
      if (w <= 0.0) continue;
      const double p1 = prob_predict_one(spec, alg, xs, ys, x);
      loss.add(w * (label(t, x) ? 1.0 - p1 : p1));
    }
    return loss.value();
  };
  if (n == 0) return risk_given({});
  return detail::enumerate_sum(spec, n, [&](const std::vector<int>& xs, double p) {
    return p * risk_given(xs);
  });
}

/// Exact Bayes excess risk: exact_excess averaged over T ~ prior_t.
inline double exact_bayes_excess(const ThresholdClassSpec& spec, long n,
                                 const ThresholdAlgorithm& alg) {
  prob::CompensatedSum total;
  for (int t = 1; t <= spec.num_thresholds(); ++t) {
    const double w = spec.prior_t[static_cast<std::size_t>(t - 1)];
    if (w > 0.0) total.add(w * exact_excess(spec, alg, t, n));
  }
  return total.value();
}

enum class ThresholdLearnerKind { bayes_optimal, posterior_sampling };

/// Learner of the given kind using the spec's own prior.
inline double exact_bayes_excess(const ThresholdClassSpec& spec, long n,
                                 ThresholdLearnerKind kind) {
  if (kind == ThresholdLearnerKind::bayes_optimal) {
    return exact_bayes_excess(spec, n, ThresholdBayesOptimal{spec.prior_t});
  }
  return exact_bayes_excess(spec, n, ThresholdPosteriorSampling{spec.prior_t});
}

}  // namespace erlab::vc
