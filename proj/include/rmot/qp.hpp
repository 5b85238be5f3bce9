#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmot/common.hpp"

namespace rmot::qp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// maximise b.x - x^T L x over {x >= 0, sum x <= 1}
struct QpResult {
  VectorXd x;
  double value = 0.0;
  double multiplier = 0.0;  // for the mass constraint
  double kkt_residual = kInf;
  bool certified = false;
  bool psd = false;
  std::string method;
  int iterations = 0;
};

struct QpOptions {
  double kkt_tol = 1e-10;
  int max_iter = 100000;
  int enumerate_max_n = 14;
  int restarts = 32;
  unsigned seed = 1;
};

inline double objective(const MatrixXd& L, const VectorXd& b, const VectorXd& x) { return b.dot(x) - x.dot(L * x); }

inline double min_eigenvalue(const MatrixXd& L) {
  if (L.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(L, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline bool is_psd(const MatrixXd& L, double tol = 1e-10) {
  return min_eigenvalue(L) >= -tol * std::max(1.0, L.cwiseAbs().maxCoeff());
}

// Euclidean projection onto {x >= 0, sum x <= 1}.
inline VectorXd project(const VectorXd& y) {
  VectorXd c = y.cwiseMax(0.0);
  if (c.sum() <= 1.0) return c;
  std::vector<double> u(y.data(), y.data() + y.size());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cum += u[i];
    double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0) tau = t;
  }
  return (y.array() - tau).cwiseMax(0.0).matrix();
}

inline double scale_of(const MatrixXd& L, const VectorXd& b) {
  double s = 1.0;
  if (b.size()) s = std::max(s, b.cwiseAbs().maxCoeff());
  if (L.size()) s = std::max(s, L.cwiseAbs().maxCoeff());
  return s;
}

// KKT residual; also returns the multiplier estimate.
inline double kkt_residual(const MatrixXd& L, const VectorXd& b, const VectorXd& x, double* mult = nullptr) {
  const Eigen::Index n = x.size();
  if (n == 0) return 0.0;
  VectorXd g = b - 2.0 * L * x;
  double mass = x.sum();
  double neg = std::max(0.0, -x.minCoeff());
  double mu = 0.0;
  if (mass >= 1.0 - 1e-12) {
    double sw = 0.0, sg = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (x(i) > 0) {
        sw += x(i);
        sg += x(i) * g(i);
      }
    mu = std::max(0.0, sw > 0 ? sg / sw : 0.0);
  }
  double r = std::max(neg, std::max(0.0, mass - 1.0));
  for (Eigen::Index i = 0; i < n; ++i) {
    r = std::max(r, g(i) - mu);
    if (x(i) > 0) r = std::max(r, std::abs(g(i) - mu));
  }
  if (mult) *mult = mu;
  return r;
}

namespace detail {

struct FaceSolution {
  bool ok = false;
  VectorXd x;
  double mu = 0.0;
};

// Stationary point of the objective restricted to the face indexed by S.
inline FaceSolution solve_face(const MatrixXd& L, const VectorXd& b, const std::vector<int>& S, bool mass_active) {
  FaceSolution f;
  const int k = static_cast<int>(S.size());
  const int n = static_cast<int>(b.size());
  f.x = VectorXd::Zero(n);
  if (k == 0) {
    f.ok = !mass_active;
    return f;
  }
  int dim = k + (mass_active ? 1 : 0);
  MatrixXd A = MatrixXd::Zero(dim, dim);
  VectorXd rhs(dim);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) A(i, j) = 2.0 * L(S[i], S[j]);
    rhs(i) = b(S[i]);
    if (mass_active) {
      A(i, k) = 1.0;
      A(k, i) = 1.0;
    }
  }
  if (mass_active) rhs(k) = 1.0;
  Eigen::FullPivLU<MatrixXd> lu(A);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) return f;
  VectorXd sol = lu.solve(rhs);
  if (!((A * sol - rhs).norm() <= 1e-9 * std::max(1.0, rhs.norm()))) return f;
  for (int i = 0; i < k; ++i) f.x(S[i]) = sol(i);
  f.mu = mass_active ? sol(k) : 0.0;
  f.ok = true;
  return f;
}

// Active-set refinement from a guessed support; certified only by the KKT check.
inline bool polish(const MatrixXd& L, const VectorXd& b, std::vector<int> S, double tol, VectorXd& out) {
  const int n = static_cast<int>(b.size());
  for (int iter = 0; iter < 4 * n + 8; ++iter) {
    std::sort(S.begin(), S.end());
    FaceSolution best;
    for (bool active : {false, true}) {
      auto f = solve_face(L, b, S, active);
      if (!f.ok) continue;
      if (!active && f.x.sum() > 1.0 + 1e-12) continue;
      if (active && f.mu < -tol) continue;
      best = f;
      break;
    }
    if (!best.ok) return false;
    // drop the most negative component
    int worst = -1;
    double wv = -1e-14;
    for (int i : S)
      if (best.x(i) < wv) {
        wv = best.x(i);
        worst = i;
      }
    if (worst >= 0) {
      S.erase(std::find(S.begin(), S.end(), worst));
      continue;
    }
    VectorXd x = best.x.cwiseMax(0.0);
    VectorXd g = b - 2.0 * L * x;
    double mu = std::max(0.0, best.mu);
    int add = -1;
    double av = tol;
    for (int i = 0; i < n; ++i) {
      if (std::find(S.begin(), S.end(), i) != S.end()) continue;
      if (g(i) - mu > av) {
        av = g(i) - mu;
        add = i;
      }
    }
    if (add < 0) {
      out = x;
      return true;
    }
    S.push_back(add);
  }
  return false;
}

inline std::vector<int> support_of(const VectorXd& x, double rel = 1e-9) {
  std::vector<int> S;
  double m = x.size() ? x.maxCoeff() : 0.0;
  for (int i = 0; i < x.size(); ++i)
    if (x(i) > rel * std::max(m, 1e-300)) S.push_back(i);
  return S;
}

inline VectorXd ascent(const MatrixXd& L, const VectorXd& b, VectorXd x, int iters, double lip) {
  VectorXd y = x, xprev = x;
  double t = 1.0;
  const double step = 1.0 / lip;
  for (int k = 0; k < iters; ++k) {
    VectorXd xn = project(y + step * (b - 2.0 * L * y));
    double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = xn + ((t - 1.0) / tn) * (xn - x);
    // adaptive restart keeps the accelerated scheme monotone
    if (objective(L, b, xn) < objective(L, b, x)) {
      y = xn;
      tn = 1.0;
    }
    xprev = x;
    x = xn;
    t = tn;
  }
  return x;
}

}  // namespace detail

inline QpResult finish(const MatrixXd& L, const VectorXd& b, VectorXd x, const std::string& method, double tol,
                       int iters, bool psd) {
  QpResult r;
  r.x = std::move(x);
  r.value = objective(L, b, r.x);
  r.kkt_residual = kkt_residual(L, b, r.x, &r.multiplier);
  r.psd = psd;
  r.method = method;
  r.iterations = iters;
  r.certified = psd && r.kkt_residual <= tol;
  return r;
}

inline QpResult maximize_on_capped_simplex(const MatrixXd& L, const VectorXd& b, const QpOptions& opt = {}) {
  const int n = static_cast<int>(b.size());
  if (L.rows() != n || L.cols() != n) throw std::invalid_argument("QP dimension mismatch");
  if (!L.allFinite() || !b.allFinite()) throw std::invalid_argument("QP data must be finite (truncate singular costs)");
  const double tol = opt.kkt_tol * scale_of(L, b);
  const bool psd = is_psd(L);
  if (n == 0) return finish(L, b, VectorXd(), "pgd", tol, 0, true);
  double lip = 2.0 * std::max(1e-12, std::abs(Eigen::SelfAdjointEigenSolver<MatrixXd>(L, Eigen::EigenvaluesOnly)
                                                     .eigenvalues()
                                                     .cwiseAbs()
                                                     .maxCoeff()));
  if (psd) {
    // try the active set directly from the best single coordinate first
    VectorXd x = VectorXd::Zero(n);
    int it = 0;
    std::vector<int> S;
    Eigen::Index arg;
    if (b.maxCoeff(&arg) > 0) S.push_back(static_cast<int>(arg));
    VectorXd cand;
    if (detail::polish(L, b, S, tol, cand)) {
      auto r = finish(L, b, cand, "pgd", tol, 0, psd);
      if (r.certified) return r;
    }
    const int chunk = 500;
    while (it < opt.max_iter) {
      x = detail::ascent(L, b, x, chunk, lip);
      it += chunk;
      if (kkt_residual(L, b, x) <= tol) return finish(L, b, x, "pgd", tol, it, psd);
      if (detail::polish(L, b, detail::support_of(x), tol, cand)) {
        auto r = finish(L, b, cand, "pgd", tol, it, psd);
        if (r.certified) return r;
      }
    }
    return finish(L, b, x, "pgd", tol, it, psd);
  }
  if (n <= opt.enumerate_max_n) {
    // every maximiser is a KKT point of some face with a nonsingular reduced system
    VectorXd best = VectorXd::Zero(n);
    double bv = 0.0;
    for (long mask = 1; mask < (1L << n); ++mask) {
      std::vector<int> S;
      for (int i = 0; i < n; ++i)
        if (mask & (1L << i)) S.push_back(i);
      for (bool active : {false, true}) {
        auto f = detail::solve_face(L, b, S, active);
        if (!f.ok) continue;
        if (f.x.minCoeff() < -1e-12 || f.x.sum() > 1.0 + 1e-12 || f.mu < -tol) continue;
        VectorXd x = f.x.cwiseMax(0.0);
        double v = objective(L, b, x);
        if (v > bv) {
          VectorXd g = b - 2.0 * L * x;
          bool kkt = true;
          for (int i = 0; i < n; ++i)
            if (g(i) - std::max(0.0, f.mu) > 1e-9 * scale_of(L, b)) kkt = false;
          if (kkt) {
            bv = v;
            best = x;
          }
        }
      }
    }
    auto r = finish(L, b, best, "enumeration", tol, 0, psd);
    r.certified = true;
    return r;
  }
  std::mt19937_64 gen(opt.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VectorXd best = VectorXd::Zero(n);
  double bv = 0.0;
  for (int s = 0; s < opt.restarts; ++s) {
    VectorXd x0(n);
    for (int i = 0; i < n; ++i) x0(i) = u(gen);
    x0 = project(x0 / std::max(1e-12, x0.sum()) * u(gen));
    VectorXd x = detail::ascent(L, b, x0, 2000, lip);
    double v = objective(L, b, x);
    if (v > bv) {
      bv = v;
      best = x;
    }
  }
  return finish(L, b, best, "multistart", tol, opt.restarts * 2000, psd);
}

}  // namespace rmot::qp
