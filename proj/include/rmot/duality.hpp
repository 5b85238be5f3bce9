#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmot/common.hpp"
#include "rmot/measures.hpp"
#include "rmot/qp.hpp"

namespace rmot::duality {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using measures::CostSpec;
using measures::GroundGrid;

// Grid-restricted dual data: interaction matrix between finite nodes and potential values.
// The point at infinity is implicit (v = 0, zero interaction).
struct GridProblem {
  MatrixXd L;
  VectorXd v;

  std::size_t size() const { return static_cast<std::size_t>(v.size()); }
  double sup_v_plus() const { return v.size() ? std::max(0.0, v.maxCoeff()) : 0.0; }
  double sup_cost() const { return L.size() ? std::max(0.0, L.maxCoeff()) : 0.0; }
  GridProblem with_v(VectorXd w) const { return {L, std::move(w)}; }
  GridProblem scaled(double t) const { return {L, t * v}; }
};

// Singular costs must come with an explicit truncation level.
inline GridProblem make_grid_problem(const CostSpec& c, const GroundGrid& grid, const std::vector<double>& v,
                                     std::optional<double> truncation = std::nullopt) {
  if (!grid.has_omega()) throw std::invalid_argument("dual grids must include the point at infinity");
  if (v.size() != grid.size()) throw std::invalid_argument("potential has wrong length for the grid");
  CostSpec cc = c;
  if (truncation) cc = CostSpec::truncated(c, *truncation);
  else if (!std::isfinite(c.ell_at_zero()))
    throw std::invalid_argument("singular cost on a grid: an explicit truncation level h is required");
  auto M = measures::cost_matrix(cc, grid.nodes());
  const auto n = static_cast<Eigen::Index>(grid.size());
  GridProblem p{MatrixXd(n, n), VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(v[i])) throw std::invalid_argument("potential values must be finite");
    p.v(i) = v[i];
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!std::isfinite(M[i][j])) throw std::invalid_argument("infinite cost between grid nodes; truncate it");
      p.L(i, j) = M[i][j];
    }
  }
  return p;
}

enum class Method { bruteforce, ascent, pgd, enumeration, multistart };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::bruteforce: return "bruteforce";
    case Method::ascent: return "ascent";
    case Method::pgd: return "pgd";
    case Method::enumeration: return "enumeration";
    case Method::multistart: return "multistart";
  }
  return "?";
}

struct DualReport {
  double value = 0.0;
  std::vector<int> occupation;  // particles per node (M_N); the rest sit at infinity
  VectorXd measure;             // maximising sub-probability (M_infinity)
  Method method = Method::bruteforce;
  bool certified = false;
  double kkt_residual = 0.0;
};

struct MNOptions {
  double max_states = 1e7;
  int restarts = 32;
  unsigned seed = 1;
};

inline double multiset_count(std::size_t n, int N) {
  // C(n + N, N): occupation vectors over n nodes with at most N particles
  double c = 1.0;
  for (int i = 1; i <= N; ++i) c = c * (static_cast<double>(n) + i) / i;
  return c;
}

inline double config_value(const GridProblem& p, const std::vector<int>& k, int N) {
  const auto n = static_cast<Eigen::Index>(p.size());
  double lin = 0.0, q = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!k[i]) continue;
    lin += k[i] * p.v(i);
    q += double(k[i]) * (k[i] - 1) * p.L(i, i);
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i && k[j]) q += double(k[i]) * k[j] * p.L(i, j);
  }
  return lin / N - q / (double(N) * (N - 1));
}

// max over N-point configurations on grid + infinity of S_N v - c_N
inline DualReport M_N_grid(const GridProblem& p, int N, const MNOptions& opt = {}) {
  if (N < 2) throw std::invalid_argument("N must be at least 2");
  const int n = static_cast<int>(p.size());
  DualReport rep;
  rep.occupation.assign(n, 0);
  const double norm = double(N) * (N - 1);
  if (multiset_count(n, N) <= opt.max_states) {
    rep.method = Method::bruteforce;
    rep.certified = true;
    std::vector<int> k(n, 0);
    VectorXd Lk = VectorXd::Zero(n);
    double best = 0.0;  // everything at infinity
    // depth-first over multisets, nodes added in nondecreasing order
    auto rec = [&](auto&& self, int first, int placed, double lin, double q) -> void {
      double val = lin / N - q / norm;
      if (val > best + 1e-15) {
        best = val;
        rep.occupation = k;
      }
      if (placed == N) return;
      for (int i = first; i < n; ++i) {
        double dq = 2.0 * Lk(i);
        ++k[i];
        Lk += p.L.col(i);
        self(self, i, placed + 1, lin + p.v(i), q + dq);
        Lk -= p.L.col(i);
        --k[i];
      }
    };
    rec(rec, 0, 0, 0.0, 0.0);
    rep.value = best;
    return rep;
  }
  rep.method = Method::ascent;
  rep.certified = false;
  std::mt19937_64 gen(opt.seed);
  std::uniform_int_distribution<int> pick(0, n);  // n = infinity
  double best = 0.0;
  for (int r = 0; r < opt.restarts; ++r) {
    std::vector<int> slot(N);
    std::vector<int> k(n, 0);
    VectorXd Lk = VectorXd::Zero(n);
    for (int& s : slot) {
      s = pick(gen);
      if (s < n) {
        ++k[s];
        Lk += p.L.col(s);
      }
    }
    // single-particle moves until no move improves
    for (bool improved = true; improved;) {
      improved = false;
      for (int a = 0; a < N; ++a) {
        int from = slot[a];
        // remove particle a
        double rem_lin = from < n ? -p.v(from) : 0.0;
        double rem_q = from < n ? -2.0 * (Lk(from) - p.L(from, from)) : 0.0;
        VectorXd Lk0 = Lk;
        if (from < n) Lk0 -= p.L.col(from);
        double bestd = 0.0;
        int to_best = from;
        for (int to = 0; to <= n; ++to) {
          if (to == from) continue;
          double add_lin = to < n ? p.v(to) : 0.0;
          double add_q = to < n ? 2.0 * Lk0(to) : 0.0;
          double d = (rem_lin + add_lin) / N - (rem_q + add_q) / norm;
          if (d > bestd + 1e-14) {
            bestd = d;
            to_best = to;
          }
        }
        if (to_best != from) {
          if (from < n) {
            --k[from];
            Lk -= p.L.col(from);
          }
          if (to_best < n) {
            ++k[to_best];
            Lk += p.L.col(to_best);
          }
          slot[a] = to_best;
          improved = true;
        }
      }
    }
    double val = config_value(p, k, N);
    if (val > best) {
      best = val;
      rep.occupation = k;
    }
  }
  rep.value = best;
  return rep;
}

// sup over grid sub-probabilities of <v, rho> - rho^T L rho
inline DualReport M_infty_grid(const GridProblem& p, const qp::QpOptions& opt = {}) {
  auto r = qp::maximize_on_capped_simplex(p.L, p.v, opt);
  DualReport rep;
  rep.value = r.value;
  rep.measure = r.x;
  rep.kkt_residual = r.kkt_residual;
  rep.certified = r.certified;
  rep.method = r.method == "pgd" ? Method::pgd : r.method == "enumeration" ? Method::enumeration : Method::multistart;
  return rep;
}

struct CheckRow {
  double param;  // N or t
  double lhs;
  double rhs;
  bool ok;
};

struct CheckReport {
  std::vector<CheckRow> rows;
  bool ok = true;
  bool certified = true;
};

inline CheckReport sandwich_suite(const GridProblem& p, const std::vector<int>& Ns, double tol = 1e-9) {
  CheckReport rep;
  auto minf = M_infty_grid(p);
  rep.certified = minf.certified;
  const double slack = p.sup_cost() + p.sup_v_plus();
  for (int N : Ns) {
    auto mn = M_N_grid(p, N);
    rep.certified = rep.certified && mn.certified;
    bool ok = minf.value <= mn.value + tol && mn.value <= minf.value + slack / N + tol;
    rep.rows.push_back({double(N), mn.value, minf.value, ok});
    rep.ok = rep.ok && ok;
  }
  return rep;
}

// M_N(v) >= K(K-1)/(N(N-1)) M_K((N-1)/(K-1) v)
inline CheckReport MN_MK_inequality(const GridProblem& p, int N, int K, double tol = 1e-9) {
  if (K < 2 || K > N) throw std::invalid_argument("need 2 <= K <= N");
  auto mn = M_N_grid(p, N);
  auto mk = M_N_grid(p.scaled(double(N - 1) / (K - 1)), K);
  double rhs = double(K) * (K - 1) / (double(N) * (N - 1)) * mk.value;
  CheckReport rep;
  rep.certified = mn.certified && mk.certified;
  rep.ok = mn.value >= rhs - tol;
  rep.rows.push_back({double(N), mn.value, rhs, rep.ok});
  return rep;
}

inline CheckReport lipschitz_check(const GridProblem& p1, const VectorXd& v2, int N, double tol = 1e-9) {
  auto a = M_N_grid(p1, N);
  auto b = M_N_grid(p1.with_v(v2), N);
  double dist = (p1.v - v2).cwiseAbs().maxCoeff();
  CheckReport rep;
  rep.certified = a.certified && b.certified;
  rep.ok = std::abs(a.value - b.value) <= dist + tol;
  rep.rows.push_back({double(N), std::abs(a.value - b.value), dist, rep.ok});
  return rep;
}

struct SlopeReport {
  std::vector<double> t;
  std::vector<double> slope;      // M_infty(t v) / t
  std::vector<double> quadratic;  // M_infty(t v) / t^2
  bool slope_nondecreasing = true;
  bool quadratic_nonincreasing = true;
  double sup_v_plus = 0.0;
};

inline SlopeReport small_t_slope(const GridProblem& p, std::vector<double> ts, double tol = 1e-9) {
  std::sort(ts.begin(), ts.end());
  SlopeReport rep;
  rep.sup_v_plus = p.sup_v_plus();
  for (double t : ts) {
    if (!(t > 0)) throw std::invalid_argument("scan parameters must be positive");
    double m = M_infty_grid(p.scaled(t)).value;
    rep.t.push_back(t);
    rep.slope.push_back(m / t);
    rep.quadratic.push_back(m / (t * t));
  }
  for (std::size_t i = 1; i < rep.t.size(); ++i) {
    if (rep.slope[i] < rep.slope[i - 1] - tol) rep.slope_nondecreasing = false;
    if (rep.quadratic[i] > rep.quadratic[i - 1] + tol * std::max(1.0, rep.quadratic[i - 1]))
      rep.quadratic_nonincreasing = false;
  }
  return rep;
}

}  // namespace rmot::duality
