// Payoff matrices of the excess-risk game: M[i][j] = e(A_i, w_j).
#pragma once

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "erlab/bayes/linear_model.hpp"
#include "erlab/game/solvers.hpp"
#include "erlab/prob/random.hpp"
#include "erlab/risk/excess_risk.hpp"
#include "erlab/vc/threshold.hpp"

namespace erlab::game {

struct PayoffMatrix {
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  Matrix values;
  Matrix std_errors;  ///< zero for exact entries

  void validate() const {
    if (values.rows() != static_cast<Eigen::Index>(rows.size()) ||
        values.cols() != static_cast<Eigen::Index>(cols.size()) ||
        std_errors.rows() != values.rows() || std_errors.cols() != values.cols()) {
      throw std::invalid_argument("PayoffMatrix: shape does not match labels");
    }
    if (!values.allFinite() || !std_errors.allFinite()) {
      throw std::invalid_argument("PayoffMatrix: non-finite entry");
    }
    if ((values + 3.0 * std_errors).minCoeff() < -1e-12) {
      throw std::invalid_argument("PayoffMatrix: excess risk below -3 std errors");
    }
  }

  [[nodiscard]] double max_std_error() const {
    return std_errors.size() ? std_errors.maxCoeff() : 0.0;
  }
};

struct ExactMode {};
struct McMode {
  std::size_t reps = 100000;
  prob::SeedSpec seed;
};
using PayoffMode = std::variant<ExactMode, McMode>;

struct UnsupportedMode : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline std::string format_weights(const Vector& w) {
  std::ostringstream os;
  os.precision(6);
  os << "w=";
  for (Eigen::Index i = 0; i < w.size(); ++i) os << (i ? ";" : "") << w[i];
  return os.str();
}

/// Points of the lattice {-c + 2c i / (m-1)}^d that lie in the c-ball.
/// m = 1 gives the origin only.
inline std::vector<Vector> mean_lattice(Eigen::Index d, double c, int per_axis) {
  if (d < 1 || per_axis < 1 || !(c >= 0.0)) {
    throw std::invalid_argument("mean_lattice: need d >= 1, per_axis >= 1, c >= 0");
  }
  std::vector<Vector> out;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  const auto coord = [&](int i) {
    return per_axis == 1 ? 0.0 : -c + 2.0 * c * i / (per_axis - 1);
  };
  for (;;) {
    Vector v(d);
    for (Eigen::Index a = 0; a < d; ++a) v[a] = coord(idx[static_cast<std::size_t>(a)]);
    if (v.norm() <= c * (1.0 + 1e-12)) out.push_back(v);
    Eigen::Index a = 0;
    while (a < d && ++idx[static_cast<std::size_t>(a)] == per_axis) {
      idx[static_cast<std::size_t>(a)] = 0;
      ++a;
    }
    if (a == d) break;
  }
  return out;
}

/// Threshold game: rows are learners, columns true thresholds.  MC entries in
/// column j share seed.child(j) across rows.
inline PayoffMatrix build_payoff(const vc::ThresholdClassSpec& spec,
                                 const std::vector<vc::ThresholdAlgorithm>& algs,
                                 const std::vector<int>& ts, long n, const PayoffMode& mode) {
  PayoffMatrix pm;
  const auto m = static_cast<Eigen::Index>(algs.size());
  const auto k = static_cast<Eigen::Index>(ts.size());
  pm.values = Matrix::Zero(m, k);
  pm.std_errors = Matrix::Zero(m, k);
  for (const auto& a : algs) pm.rows.push_back(vc::describe(a));
  for (int t : ts) pm.cols.push_back("t=" + std::to_string(t));
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& alg = algs[static_cast<std::size_t>(i)];
      const int t = ts[static_cast<std::size_t>(j)];
      if (const auto* mc = std::get_if<McMode>(&mode)) {
        const auto est = risk::excess_risk_mc(spec, alg, t, n, mc->reps,
                                              mc->seed.child(static_cast<std::uint64_t>(j)));
        pm.values(i, j) = est.mean;
        pm.std_errors(i, j) = est.std_error;
      } else {
        pm.values(i, j) = vc::exact_excess(spec, alg, t, n);
      }
    }
  }
  pm.validate();
  return pm;
}

/// Gaussian linear game.  Exact mode needs constant features with d = 1.
inline PayoffMatrix build_payoff(const bayes::LinearModelSpec& spec,
                                 const std::vector<risk::LinearAlgorithm>& algs,
                                 const std::vector<Vector>& ws, long n, const PayoffMode& mode) {
  spec.validate();
  PayoffMatrix pm;
  const auto m = static_cast<Eigen::Index>(algs.size());
  const auto k = static_cast<Eigen::Index>(ws.size());
  pm.values = Matrix::Zero(m, k);
  pm.std_errors = Matrix::Zero(m, k);
  for (const auto& a : algs) pm.rows.push_back(risk::describe(a));
  for (const auto& w : ws) pm.cols.push_back(format_weights(w));
  const bool exact = std::holds_alternative<ExactMode>(mode);
  if (exact) {
    const auto* mono = std::get_if<bayes::MonomialFeatures>(&spec.feature_map);
    if (spec.d != 1 || mono == nullptr || mono->degree != 0) {
      throw UnsupportedMode("exact payoff needs a threshold model or d = 1 constant features");
    }
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& alg = algs[static_cast<std::size_t>(i)];
      const auto& w = ws[static_cast<std::size_t>(j)];
      if (exact) {
        pm.values(i, j) = risk::exact_excess_constant_features(spec, alg, w[0], n);
      } else {
        const auto& mc = std::get<McMode>(mode);
        const auto est = risk::excess_risk_mc(spec, alg, w, n, mc.reps,
                                              mc.seed.child(static_cast<std::uint64_t>(j)));
        pm.values(i, j) = est.mean;
        pm.std_errors(i, j) = est.std_error;
      }
    }
  }
  pm.validate();
  return pm;
}

inline void write_payoff_csv(std::ostream& os, const PayoffMatrix& pm) {
  os << "row_label,col_label,value,std_error\n";
  os.precision(17);
  for (Eigen::Index i = 0; i < pm.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < pm.values.cols(); ++j) {
      os << pm.rows[static_cast<std::size_t>(i)] << ',' << pm.cols[static_cast<std::size_t>(j)]
         << ',' << pm.values(i, j) << ',' << pm.std_errors(i, j) << '\n';
    }
  }
}

/// Inverse of write_payoff_csv; labels keep first-appearance order.
inline PayoffMatrix read_payoff_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "row_label,col_label,value,std_error") {
    throw std::invalid_argument("payoff CSV: missing header");
  }
  struct Entry {
    std::size_t i, j;
    double v, se;
  };
  std::map<std::string, std::size_t> row_idx;
  std::map<std::string, std::size_t> col_idx;
  std::vector<Entry> entries;
  PayoffMatrix pm;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 4) throw std::invalid_argument("payoff CSV: expected 4 fields: " + line);
    auto [ri, rnew] = row_idx.emplace(f[0], pm.rows.size());
    if (rnew) pm.rows.push_back(f[0]);
    auto [ci, cnew] = col_idx.emplace(f[1], pm.cols.size());
    if (cnew) pm.cols.push_back(f[1]);
    entries.push_back({ri->second, ci->second, std::stod(f[2]), std::stod(f[3])});
  }
  pm.values = Matrix::Zero(static_cast<Eigen::Index>(pm.rows.size()),
                           static_cast<Eigen::Index>(pm.cols.size()));
  pm.std_errors = pm.values;
  for (const auto& e : entries) {
    pm.values(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) = e.v;
    pm.std_errors(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) = e.se;
  }
  return pm;
}

}  // namespace erlab::game
