// Discrete memoryless channels and Blahut-Arimoto capacity.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "erlab/vc/threshold.hpp"

namespace erlab::vc {

/// P(output | input); one row per input.
struct DiscreteChannel {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  Eigen::MatrixXd transition;

  void validate() const {
    if (transition.rows() != static_cast<Eigen::Index>(inputs.size()) ||
        transition.cols() != static_cast<Eigen::Index>(outputs.size())) {
      throw std::invalid_argument("DiscreteChannel: label counts do not match matrix shape");
    }
    if (transition.size() > 0 && transition.minCoeff() < 0.0) {
      throw std::invalid_argument("DiscreteChannel: negative transition probability");
    }
    for (Eigen::Index i = 0; i < transition.rows(); ++i) {
      if (std::abs(transition.row(i).sum() - 1.0) > 1e-12) {
        throw std::invalid_argument("DiscreteChannel: row " + std::to_string(i) +
                                    " does not sum to 1");
      }
    }
  }
};

/// I(input; output) in nats for the given input distribution.
inline double mutual_information(const DiscreteChannel& ch, const std::vector<double>& prior) {
  const Eigen::Index m = ch.transition.rows();
  if (static_cast<Eigen::Index>(prior.size()) != m) {
    throw std::invalid_argument("mutual_information: prior size mismatch");
  }
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(ch.transition.cols());
  for (Eigen::Index i = 0; i < m; ++i) out += prior[static_cast<std::size_t>(i)] * ch.transition.row(i);
  double info = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double p = prior[static_cast<std::size_t>(i)];
    if (p <= 0.0) continue;
    for (Eigen::Index j = 0; j < ch.transition.cols(); ++j) {
      const double w = ch.transition(i, j);
      if (w > 0.0) info += p * w * std::log(w / out[j]);
    }
  }
  return info;
}

struct CapacityResult {
  double capacity = 0.0;  ///< I(prior) at the returned prior (a lower bound)
  double upper = 0.0;     ///< max_x KL(W(.|x) || output marginal) (an upper bound)
  std::vector<double> prior;
  int iterations = 0;

  /// A valid capacity bound kappa_n: the certified upper estimate.
  [[nodiscard]] double kappa() const noexcept { return upper; }
};

/// Alternating Blahut-Arimoto iteration from the uniform prior.  Stops once
/// the certified upper and lower capacity estimates differ by at most `tol`.
inline CapacityResult blahut_arimoto(const DiscreteChannel& ch, double tol,
                                     int max_iters = 1'000'000) {
  if (!(tol > 0.0)) throw std::invalid_argument("blahut_arimoto: tol must be > 0");
  ch.validate();
  const Eigen::Index m = ch.transition.rows();
  const Eigen::Index k = ch.transition.cols();
  if (m == 0) throw std::invalid_argument("blahut_arimoto: channel has no inputs");
  std::vector<double> p(static_cast<std::size_t>(m), 1.0 / static_cast<double>(m));
  std::vector<double> div(static_cast<std::size_t>(m));
  CapacityResult res;
  for (int it = 1; it <= max_iters; ++it) {
    Eigen::RowVectorXd q = Eigen::RowVectorXd::Zero(k);
    for (Eigen::Index i = 0; i < m; ++i) q += p[static_cast<std::size_t>(i)] * ch.transition.row(i);
    double lower = 0.0;
    double upper = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      double d = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        const double w = ch.transition(i, j);
        if (w > 0.0) d += w * std::log(w / q[j]);
      }
      div[static_cast<std::size_t>(i)] = d;
      lower += p[static_cast<std::size_t>(i)] * d;
      upper = std::max(upper, d);
    }
    res = {lower, upper, p, it};
    if (upper - lower <= tol) return res;
    double norm = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      p[static_cast<std::size_t>(i)] *= std::exp(div[static_cast<std::size_t>(i)] - upper);
      norm += p[static_cast<std::size_t>(i)];
    }
    for (double& v : p) v /= norm;
  }
  return res;
}

/// The data channel T -> Z^n of the threshold class.  Outputs are the pairs
/// (x^n, y^n) reachable from some threshold; P(z^n | t) = P(x^n) 1[y^n = h_t(x^n)].
inline DiscreteChannel threshold_channel(const ThresholdClassSpec& spec, long n) {
  spec.validate();
  detail::guard_size(spec, n);
  std::uint64_t total = 1;
  for (long i = 0; i < n; ++i) total *= static_cast<std::uint64_t>(spec.k);

  struct Column {
    std::string label;
    std::vector<std::pair<int, double>> entries;  // (threshold index, prob)
  };
  std::vector<Column> columns;
  std::vector<int> xs(static_cast<std::size_t>(n));
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    std::uint64_t rest = idx;
    double px = 1.0;
    for (long i = 0; i < n; ++i) {
      const int x = static_cast<int>(rest % static_cast<std::uint64_t>(spec.k));
      rest /= static_cast<std::uint64_t>(spec.k);
      xs[static_cast<std::size_t>(i)] = x + 1;
      px *= spec.px[static_cast<std::size_t>(x)];
    }
    if (px <= 0.0) continue;
    std::map<std::uint64_t, std::size_t> by_mask;
    for (int t = 1; t <= spec.num_thresholds(); ++t) {
      const std::uint64_t mask = labeling(t, xs);
      auto [it, fresh] = by_mask.emplace(mask, columns.size());
      if (fresh) {
        std::string lbl = "x=";
        for (std::size_t i = 0; i < xs.size(); ++i) lbl += (i ? "." : "") + std::to_string(xs[i]);
        lbl += "|y=";
        for (std::size_t i = 0; i < xs.size(); ++i) {
          lbl += (i ? "." : "") + std::to_string((mask >> i) & 1U);
        }
        columns.push_back({std::move(lbl), {}});
      }
      columns[it->second].entries.emplace_back(t - 1, px);
    }
  }
  DiscreteChannel ch;
  for (int t = 1; t <= spec.num_thresholds(); ++t) ch.inputs.push_back("t=" + std::to_string(t));
  ch.transition = Eigen::MatrixXd::Zero(spec.num_thresholds(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    ch.outputs.push_back(columns[j].label);
    for (const auto& [row, p] : columns[j].entries) ch.transition(row, static_cast<Eigen::Index>(j)) = p;
  }
  return ch;
}

/// CSV with header input,output,probability; zero entries omitted.
inline void write_channel_csv(std::ostream& os, const DiscreteChannel& ch) {
  os << "input,output,probability\n";
  os.precision(17);
  for (Eigen::Index i = 0; i < ch.transition.rows(); ++i) {
    for (Eigen::Index j = 0; j < ch.transition.cols(); ++j) {
      if (ch.transition(i, j) > 0.0) {
        os << ch.inputs[static_cast<std::size_t>(i)] << ',' << ch.outputs[static_cast<std::size_t>(j)]
           << ',' << ch.transition(i, j) << '\n';
      }
    }
  }
}

}  // namespace erlab::vc
