#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "rmot/common.hpp"
#include "rmot/lp.hpp"

namespace rmot::convex {

template <class T = double>
struct LatticeFunction {
  std::vector<std::vector<T>> points;
  std::vector<T> values;
  std::vector<bool> infinite;  // value is +inf at this point (values entry ignored)

  void add(std::vector<T> p, T q) {
    points.push_back(std::move(p));
    values.push_back(std::move(q));
    infinite.push_back(false);
  }
  void add_infinite(std::vector<T> p) {
    points.push_back(std::move(p));
    values.push_back(T(0));
    infinite.push_back(true);
  }
  std::size_t size() const { return points.size(); }
};

template <class T>
struct EnvelopeResult {
  bool finite = false;  // false means +inf (query outside the hull of finite data)
  T value{};
  std::vector<T> mixture;  // one weight per data point
  bool alternative_optima = false;
  double as_double() const { return finite ? ScalarOps<T>::to_double(value) : kInf; }
};

// Lower convex envelope at t: min sum l_i q_i, sum l_i p_i = t, sum l_i = 1, l >= 0.
template <class T>
EnvelopeResult<T> envelope_eval(const LatticeFunction<T>& L, const std::vector<T>& t, const LpOptions& opt = {}) {
  EnvelopeResult<T> out;
  out.mixture.assign(L.size(), T(0));
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < L.size(); ++i)
    if (!L.infinite[i]) idx.push_back(i);
  if (idx.empty()) return out;
  const std::size_t m = t.size();
  LinearProgram<T> lp;
  lp.objective.reserve(idx.size());
  lp.A.assign(m + 1, std::vector<T>(idx.size(), T(0)));
  lp.b.assign(m + 1, T(0));
  for (std::size_t c = 0; c < idx.size(); ++c) {
    const auto& p = L.points[idx[c]];
    if (p.size() != m) throw std::invalid_argument("query dimension does not match lattice data");
    lp.objective.push_back(L.values[idx[c]]);
    for (std::size_t r = 0; r < m; ++r) lp.A[r][c] = p[r];
    lp.A[m][c] = T(1);
  }
  for (std::size_t r = 0; r < m; ++r) lp.b[r] = t[r];
  lp.b[m] = T(1);
  auto res = lp_solve(lp, opt);
  if (res.status != LpStatus::optimal) return out;
  out.finite = true;
  out.value = res.value;
  out.alternative_optima = res.alternative_optima;
  for (std::size_t c = 0; c < idx.size(); ++c) out.mixture[idx[c]] = res.x[c];
  return out;
}

inline EnvelopeResult<double> envelope_eval(const LatticeFunction<double>& L, const std::vector<double>& t) {
  return envelope_eval<double>(L, t, LpOptions{});
}

// Same value through the supporting-hyperplane program:
// max b + a.t  s.t.  b + a.p_i <= q_i. Unbounded means t is outside the hull.
inline double envelope_eval_dual(const LatticeFunction<double>& L, const std::vector<double>& t) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < L.size(); ++i)
    if (!L.infinite[i]) idx.push_back(i);
  if (idx.empty()) return kInf;
  const std::size_t m = t.size();
  const std::size_t nfree = 2 * (m + 1);
  LinearProgram<double> lp;
  lp.objective.assign(nfree + idx.size(), 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    lp.objective[2 * r] = -t[r];
    lp.objective[2 * r + 1] = t[r];
  }
  lp.objective[2 * m] = -1.0;
  lp.objective[2 * m + 1] = 1.0;
  lp.A.assign(idx.size(), std::vector<double>(nfree + idx.size(), 0.0));
  lp.b.assign(idx.size(), 0.0);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& p = L.points[idx[i]];
    for (std::size_t r = 0; r < m; ++r) {
      lp.A[i][2 * r] = p[r];
      lp.A[i][2 * r + 1] = -p[r];
    }
    lp.A[i][2 * m] = 1.0;
    lp.A[i][2 * m + 1] = -1.0;
    lp.A[i][nfree + i] = 1.0;
    lp.b[i] = L.values[idx[i]];
  }
  auto res = lp_solve(lp);
  if (res.status == LpStatus::unbounded) return kInf;
  if (res.status != LpStatus::optimal) throw NumericalError("supporting hyperplane program infeasible");
  return -res.value;
}

// Piecewise-affine function on [xs.front(), xs.back()], +inf outside.
struct PiecewiseAffine {
  std::vector<double> xs, ys;
  double operator()(double x) const {
    if (xs.empty()) return kInf;
    const double tol = 1e-12 * std::max(1.0, std::abs(xs.back() - xs.front()));
    if (x < xs.front() - tol || x > xs.back() + tol) return kInf;
    if (xs.size() == 1) return ys[0];
    x = std::clamp(x, xs.front(), xs.back());
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = static_cast<std::size_t>(it - xs.begin());
    if (i >= xs.size()) return ys.back();
    if (i == 0) return ys.front();
    double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] * (1 - w) + ys[i] * w;
  }
};

// Lower hull by monotone chain.
inline PiecewiseAffine envelope_1d(const LatticeFunction<double>& L) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < L.size(); ++i) {
    if (L.infinite[i]) continue;
    if (L.points[i].size() != 1) throw std::invalid_argument("envelope_1d needs one-dimensional data");
    pts.emplace_back(L.points[i][0], L.values[i]);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<std::pair<double, double>> h;
  for (const auto& p : pts) {
    if (!h.empty() && h.back().first == p.first) continue;  // sorted: keeps the smaller value
    while (h.size() >= 2) {
      const auto& a = h[h.size() - 2];
      const auto& b = h.back();
      double cross = (b.first - a.first) * (p.second - a.second) - (b.second - a.second) * (p.first - a.first);
      if (cross <= 0) h.pop_back();
      else break;
    }
    h.push_back(p);
  }
  PiecewiseAffine f;
  for (const auto& p : h) {
    f.xs.push_back(p.first);
    f.ys.push_back(p.second);
  }
  return f;
}

// f*(v) = max_i (v x_i - f_i)
inline std::vector<double> legendre_1d(const std::vector<double>& xs, const std::vector<double>& fs,
                                       const std::vector<double>& slopes) {
  if (xs.size() != fs.size() || xs.empty()) throw std::invalid_argument("legendre_1d needs matching samples");
  std::vector<double> out(slopes.size(), -kInf);
  for (std::size_t j = 0; j < slopes.size(); ++j)
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (fs[i] == kInf) continue;
      out[j] = std::max(out[j], slopes[j] * xs[i] - fs[i]);
    }
  return out;
}

struct RecessionResult {
  double value;       // +inf when the quotients diverge
  double largest_t;
  bool nonconvex;     // quotients were not nondecreasing
};

inline RecessionResult recession_slope(const std::function<double(double)>& f, double x0, double z,
                                       double t_max = 1e6) {
  double f0 = f(x0);
  double prev = -kInf, prev_inc = kInf;
  bool nonconvex = false;
  double t = 1.0, q = 0.0;
  int growing = 0;
  for (; t <= t_max; t *= 2.0) {
    q = (f(x0 + t * z) - f0) / t;
    if (!std::isfinite(q)) return {kInf, t, nonconvex};
    double tol = 1e-9 * std::max(1.0, std::abs(q));
    if (q < prev - tol) nonconvex = true;
    if (std::isfinite(prev)) {
      double inc = q - prev;
      // linear-or-faster growth of the quotient means no finite limit
      growing = (inc > tol && inc > 0.75 * prev_inc) ? growing + 1 : 0;
      prev_inc = inc;
    }
    prev = q;
  }
  t /= 2.0;
  if (growing >= 5) return {kInf, t, nonconvex};
  return {q, t, nonconvex};
}

}  // namespace rmot::convex
