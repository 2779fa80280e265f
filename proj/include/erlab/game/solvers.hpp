// Finite zero-sum games.  Rows are the designer's actions and minimize; columns
// are the world's parameters and maximize.  The value is
//   min_p max_q p' M q = max_q min_p p' M q.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace erlab::game {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Nonnegative weights summing to 1.
struct MixedStrategy {
  std::vector<double> weights;

  [[nodiscard]] Vector as_vector() const {
    return Eigen::Map<const Vector>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  }
  [[nodiscard]] bool is_simplex(double tol = 1e-12) const {
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) return false;
      total += w;
    }
    return std::abs(total - 1.0) <= tol;
  }
};

struct GameSolution {
  MixedStrategy row;
  MixedStrategy col;
  double value = 0.0;
  double upper = 0.0;  ///< max_j (p' M)_j: what the row strategy guarantees
  double lower = 0.0;  ///< min_i (M q)_i: what the column strategy guarantees
  double gap = 0.0;    ///< upper - lower
  long iterations = 0;
};

namespace detail {
inline void require_game(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw std::invalid_argument("game matrix is empty");
  if (!m.allFinite()) throw std::invalid_argument("game matrix has non-finite entries");
}

inline MixedStrategy to_strategy(const Vector& v) {
  MixedStrategy s;
  s.weights.assign(v.data(), v.data() + v.size());
  return s;
}

inline void certify(const Matrix& m, GameSolution& sol) {
  const Vector p = sol.row.as_vector();
  const Vector q = sol.col.as_vector();
  sol.upper = (p.transpose() * m).maxCoeff();
  sol.lower = (m * q).minCoeff();
  sol.gap = sol.upper - sol.lower;
  sol.value = 0.5 * (sol.upper + sol.lower);
}
}  // namespace detail

/// Simultaneous fictitious play.  Each player best-responds to the other's
/// empirical mixture, lowest index winning ties.  The empirical mixtures
/// bracket the value: lower() <= value <= upper().
class FictitiousPlay {
 public:
  explicit FictitiousPlay(Matrix m)
      : m_(std::move(m)),
        row_counts_(Vector::Zero(m_.rows())),
        col_counts_(Vector::Zero(m_.cols())),
        row_payoff_(Vector::Zero(m_.rows())),
        col_payoff_(Vector::Zero(m_.cols())) {
    detail::require_game(m_);
  }

  void step() {
    Eigen::Index i = 0;
    Eigen::Index j = 0;
    row_payoff_.minCoeff(&i);
    col_payoff_.maxCoeff(&j);
    row_counts_[i] += 1.0;
    col_counts_[j] += 1.0;
    row_payoff_ += m_.col(j);
    col_payoff_ += m_.row(i).transpose();
    ++t_;
  }

  [[nodiscard]] long iterations() const noexcept { return t_; }
  [[nodiscard]] double upper() const { return col_payoff_.maxCoeff() / static_cast<double>(t_); }
  [[nodiscard]] double lower() const { return row_payoff_.minCoeff() / static_cast<double>(t_); }
  [[nodiscard]] double gap() const { return upper() - lower(); }
  [[nodiscard]] MixedStrategy row_strategy() const {
    return detail::to_strategy(row_counts_ / static_cast<double>(t_));
  }
  [[nodiscard]] MixedStrategy col_strategy() const {
    return detail::to_strategy(col_counts_ / static_cast<double>(t_));
  }

 private:
  Matrix m_;
  Vector row_counts_;
  Vector col_counts_;
  Vector row_payoff_;  // M * col_counts
  Vector col_payoff_;  // M' * row_counts
  long t_ = 0;
};

/// Runs fictitious play until the certified gap is <= tol or max_iters.
inline GameSolution solve_fictitious_play(const Matrix& m, long max_iters, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_fictitious_play: tol must be > 0");
  if (max_iters < 1) throw std::invalid_argument("solve_fictitious_play: max_iters must be >= 1");
  FictitiousPlay fp(m);
  do {
    fp.step();
  } while (fp.iterations() < max_iters && fp.gap() > tol);
  GameSolution sol{fp.row_strategy(), fp.col_strategy()};
  detail::certify(m, sol);
  sol.iterations = fp.iterations();
  return sol;
}

struct LpSolution {
  MixedStrategy row;
  MixedStrategy col;
  double value = 0.0;
  double primal_value = 0.0;  ///< max_j (p' M)_j
  double dual_value = 0.0;    ///< min_i (M q)_i
  long pivots = 0;
};

/// Dense tableau simplex on the shifted game M' = M - min(M) + 1 > 0:
///   max 1'u  s.t.  M'^T u <= 1, u >= 0,
/// whose optimum is 1/v' with row strategy u v'.  The column strategy comes
/// from the slack reduced costs.  Dantzig's entering rule with a
/// lexicographic ratio test, so the method cannot cycle.
inline LpSolution solve_lp(const Matrix& m) {
  detail::require_game(m);
  const Eigen::Index rows = m.rows();  // primal variables
  const Eigen::Index cons = m.cols();  // constraints
  const double shift = 1.0 - m.minCoeff();
  const Matrix mp = m.array() + shift;

  // Tableau: constraints 0..cons-1, objective row `cons`.
  // Columns: u (rows), slacks (cons), rhs.
  const Eigen::Index width = rows + cons + 1;
  Matrix tab = Matrix::Zero(cons + 1, width);
  tab.block(0, 0, cons, rows) = mp.transpose();
  tab.block(0, rows, cons, cons).setIdentity();
  tab.col(width - 1).head(cons).setOnes();
  tab.row(cons).head(rows).setConstant(-1.0);
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(cons));
  for (Eigen::Index r = 0; r < cons; ++r) basis[static_cast<std::size_t>(r)] = rows + r;

  constexpr double kEps = 1e-12;
  long pivots = 0;
  for (;;) {
    Eigen::Index enter = -1;
    double most = -kEps;
    for (Eigen::Index c = 0; c < rows + cons; ++c) {
      if (tab(cons, c) < most) {
        most = tab(cons, c);
        enter = c;
      }
    }
    if (enter < 0) break;

    // Lexicographic minimum of (rhs, B^-1 row) / pivot over eligible rows.
    Eigen::Index leave = -1;
    for (Eigen::Index r = 0; r < cons; ++r) {
      if (tab(r, enter) <= kEps) continue;
      if (leave < 0) {
        leave = r;
        continue;
      }
      const double a = tab(r, enter);
      const double b = tab(leave, enter);
      auto key = [&](Eigen::Index row, double piv, Eigen::Index k) {
        return k < 0 ? tab(row, width - 1) / piv : tab(row, rows + k) / piv;
      };
      for (Eigen::Index k = -1; k < cons; ++k) {
        const double kr = key(r, a, k);
        const double kl = key(leave, b, k);
        if (kr < kl - kEps) {
          leave = r;
          break;
        }
        if (kr > kl + kEps) break;
      }
    }
    if (leave < 0) throw std::runtime_error("solve_lp: unbounded (cannot happen for M' > 0)");

    const double piv = tab(leave, enter);
    tab.row(leave) /= piv;
    for (Eigen::Index r = 0; r <= cons; ++r) {
      const double f = tab(r, enter);
      if (r != leave && f != 0.0) tab.row(r) -= f * tab.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
    ++pivots;
  }

  Vector u = Vector::Zero(rows);
  for (Eigen::Index r = 0; r < cons; ++r) {
    const Eigen::Index b = basis[static_cast<std::size_t>(r)];
    if (b < rows) u[b] = tab(r, width - 1);
  }
  Vector y = tab.row(cons).segment(rows, cons).transpose().cwiseMax(0.0);
  LpSolution sol;
  sol.row = detail::to_strategy(u / u.sum());
  sol.col = detail::to_strategy(y / y.sum());
  sol.pivots = pivots;
  GameSolution cert{sol.row, sol.col};
  detail::certify(m, cert);
  sol.primal_value = cert.upper;
  sol.dual_value = cert.lower;
  sol.value = cert.value;
  return sol;
}

/// World's maximin mixed strategy.
inline MixedStrategy least_favorable_prior(const Matrix& m) { return solve_lp(m).col; }

struct PureGap {
  double minimax = 0.0;  ///< min_i max_j M_ij: designer commits first
  double maximin = 0.0;  ///< max_j min_i M_ij: world commits first
  double gap = 0.0;
};

inline PureGap duality_gap_pure(const Matrix& m) {
  detail::require_game(m);
  PureGap g;
  g.minimax = m.rowwise().maxCoeff().minCoeff();
  g.maximin = m.colwise().minCoeff().maxCoeff();
  g.gap = g.minimax - g.maximin;
  return g;
}

}  // namespace erlab::game
