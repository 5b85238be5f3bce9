#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include <boost/multiprecision/gmp.hpp>

namespace rmot::convex {

using Rational = boost::multiprecision::mpq_rational;

template <class T>
struct ScalarOps;

template <>
struct ScalarOps<double> {
  static constexpr bool exact = false;
  static double abs(double x) { return std::abs(x); }
  static double to_double(double x) { return x; }
};

template <>
struct ScalarOps<Rational> {
  static constexpr bool exact = true;
  static Rational abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }
  static double to_double(const Rational& x) { return x.convert_to<double>(); }
};

enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s) {
  return s == LpStatus::optimal ? "optimal" : s == LpStatus::infeasible ? "infeasible" : "unbounded";
}

// min c^T x  s.t.  A x = b, x >= 0
template <class T>
struct LinearProgram {
  std::vector<T> objective;
  std::vector<std::vector<T>> A;
  std::vector<T> b;
  std::size_t num_vars() const { return objective.size(); }
};

template <class T>
struct LpResult {
  LpStatus status = LpStatus::infeasible;
  T value{};
  std::vector<T> x;
  std::vector<std::size_t> basis;      // basic columns (original indices) at optimum
  std::vector<T> reduced_costs;        // per original variable
  bool alternative_optima = false;     // a nonbasic column has zero reduced cost
  std::size_t pivots = 0;
};

struct LpOptions {
  std::ostream* trace = nullptr;  // tableau dump per pivot when non-null
  std::size_t max_pivots = 5000000;
};

namespace detail {

template <class T>
class Tableau {
 public:
  using Ops = ScalarOps<T>;

  Tableau(const LinearProgram<T>& lp, const LpOptions& opt) : opt_(opt) {
    m_ = lp.A.size();
    n_ = lp.num_vars();
    for (const auto& row : lp.A)
      if (row.size() != n_) throw std::invalid_argument("LP constraint row has wrong length");
    if (lp.b.size() != m_) throw std::invalid_argument("LP rhs has wrong length");
    cols_ = n_ + m_;
    t_.assign(m_ + 1, std::vector<T>(cols_ + 1, T(0)));
    double scale = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      bool flip = lp.b[i] < 0;
      for (std::size_t j = 0; j < n_; ++j) {
        t_[i][j] = flip ? T(-lp.A[i][j]) : lp.A[i][j];
        scale = std::max(scale, Ops::to_double(Ops::abs(t_[i][j])));
      }
      t_[i][n_ + i] = T(1);
      t_[i][cols_] = flip ? T(-lp.b[i]) : lp.b[i];
      scale = std::max(scale, Ops::to_double(Ops::abs(t_[i][cols_])));
    }
    for (const auto& c : lp.objective) scale = std::max(scale, Ops::to_double(Ops::abs(c)));
    eps_ = Ops::exact ? 0.0 : 1e-11 * scale;
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) basis_[i] = n_ + i;
    allowed_.assign(cols_, true);
    row_alive_.assign(m_, true);
  }

  bool neg(const T& x) const {
    if constexpr (ScalarOps<T>::exact) return x < 0;
    else return x < -eps_;
  }
  bool pos(const T& x) const {
    if constexpr (ScalarOps<T>::exact) return x > 0;
    else return x > eps_;
  }
  bool zero(const T& x) const { return !neg(x) && !pos(x); }

  void set_objective(const std::vector<T>& c) {
    auto& z = t_[m_];
    for (std::size_t j = 0; j <= cols_; ++j) z[j] = T(0);
    for (std::size_t j = 0; j < c.size(); ++j) z[j] = c[j];
    // z row holds reduced costs; last entry holds -objective value
    for (std::size_t i = 0; i < m_; ++i) {
      if (!row_alive_[i]) continue;
      const T cb = basis_[i] < c.size() ? c[basis_[i]] : T(0);
      if (cb == 0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) z[j] -= cb * t_[i][j];
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    T p = t_[r][c];
    for (std::size_t j = 0; j <= cols_; ++j) t_[r][j] /= p;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      if (i < m_ && !row_alive_[i]) continue;
      T f = t_[i][c];
      if (f == 0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) t_[i][j] -= f * t_[r][j];
    }
    basis_[r] = c;
    ++pivots_;
    if (opt_.trace) dump(*opt_.trace);
  }

  // Bland's rule: smallest entering index, ties in ratio test by smallest basic index.
  LpStatus run() {
    for (;;) {
      if (pivots_ > opt_.max_pivots) throw std::runtime_error("LP pivot limit exceeded");
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < cols_; ++j)
        if (allowed_[j] && neg(t_[m_][j])) {
          enter = j;
          break;
        }
      if (enter == cols_) return LpStatus::optimal;
      std::size_t leave = m_;
      T best{};
      const T tol = ScalarOps<T>::exact ? T(0) : T(eps_);
      for (std::size_t i = 0; i < m_; ++i) {
        if (!row_alive_[i] || !pos(t_[i][enter])) continue;
        T ratio = t_[i][cols_] / t_[i][enter];
        if (leave == m_ || ratio < best - tol) {
          leave = i;
          best = ratio;
        } else if (ratio <= best + tol && basis_[i] < basis_[leave]) {
          leave = i;
        }
      }
      if (leave == m_) return LpStatus::unbounded;
      pivot(leave, enter);
    }
  }

  LpResult<T> solve(const std::vector<T>& c) {
    LpResult<T> res;
    // phase 1: minimise the sum of artificials
    std::vector<T> phase1(cols_, T(0));
    for (std::size_t i = 0; i < m_; ++i) phase1[n_ + i] = T(1);
    set_objective(phase1);
    run();
    T infeas = -t_[m_][cols_];
    if (pos(infeas)) {
      res.status = LpStatus::infeasible;
      res.pivots = pivots_;
      return res;
    }
    // drive artificials out of the basis; rows that cannot be cleared are redundant
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      std::size_t col = n_;
      for (std::size_t j = 0; j < n_; ++j)
        if (!zero(t_[i][j])) {
          col = j;
          break;
        }
      if (col == n_) row_alive_[i] = false;
      else pivot(i, col);
    }
    for (std::size_t j = n_; j < cols_; ++j) allowed_[j] = false;
    set_objective(c);
    LpStatus st = run();
    res.status = st;
    res.pivots = pivots_;
    if (st != LpStatus::optimal) return res;
    res.x.assign(n_, T(0));
    for (std::size_t i = 0; i < m_; ++i)
      if (row_alive_[i] && basis_[i] < n_) {
        res.x[basis_[i]] = t_[i][cols_];
        res.basis.push_back(basis_[i]);
      }
    std::sort(res.basis.begin(), res.basis.end());
    res.value = T(0);
    for (std::size_t j = 0; j < n_; ++j) res.value += c[j] * res.x[j];
    res.reduced_costs.assign(t_[m_].begin(), t_[m_].begin() + static_cast<long>(n_));
    std::vector<bool> is_basic(n_, false);
    for (auto j : res.basis) is_basic[j] = true;
    for (std::size_t j = 0; j < n_; ++j)
      if (!is_basic[j] && zero(res.reduced_costs[j])) res.alternative_optima = true;
    return res;
  }

  void dump(std::ostream& os) const {
    os << "tableau after pivot " << pivots_ << " basis:";
    for (std::size_t i = 0; i < m_; ++i) os << ' ' << (row_alive_[i] ? static_cast<long>(basis_[i]) : -1L);
    os << '\n';
    for (std::size_t i = 0; i <= m_; ++i) {
      for (std::size_t j = 0; j <= cols_; ++j) os << ' ' << ScalarOps<T>::to_double(t_[i][j]);
      os << '\n';
    }
  }

 private:
  LpOptions opt_;
  std::size_t m_ = 0, n_ = 0, cols_ = 0, pivots_ = 0;
  double eps_ = 0.0;
  std::vector<std::vector<T>> t_;
  std::vector<std::size_t> basis_;
  std::vector<bool> allowed_;
  std::vector<bool> row_alive_;
};

}  // namespace detail

template <class T>
LpResult<T> lp_solve(const LinearProgram<T>& lp, const LpOptions& opt = {}) {
  detail::Tableau<T> tab(lp, opt);
  return tab.solve(lp.objective);
}

}  // namespace rmot::convex
