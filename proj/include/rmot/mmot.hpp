#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmot/common.hpp"
#include "rmot/convex.hpp"
#include "rmot/lp.hpp"
#include "rmot/measures.hpp"

namespace rmot::mmot {

using convex::Rational;
using measures::CostSpec;
using measures::DiscreteMeasure;
using measures::Point;

template <class T>
using Mat = std::vector<std::vector<T>>;

inline double c_N_eval(const CostSpec& c, const std::vector<Point>& config) {
  const std::size_t N = config.size();
  if (N < 2) throw std::invalid_argument("c_N needs at least two points");
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j) s += c.eval(measures::distance(config[i], config[j]));
  return 2.0 * s / (static_cast<double>(N) * (N - 1));
}

struct QuadraticFormQ {
  Mat<double> L;
  bool diag_infinite = false;
  bool psd = false;  // only meaningful when all entries are finite

  std::size_t m() const { return L.size(); }

  // t^T L t with 0 * inf = 0
  double value(const std::vector<double>& t) const {
    double s = 0.0;
    for (std::size_t i = 0; i < L.size(); ++i)
      for (std::size_t j = 0; j < L.size(); ++j) s += weighted(t[i] * t[j], L[i][j]);
    return s;
  }
};

inline bool is_psd(const Mat<double>& L, double tol = 1e-10) {
  const auto n = static_cast<Eigen::Index>(L.size());
  if (n == 0) return true;
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!std::isfinite(L[i][j])) return false;
      A(i, j) = L[i][j];
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol * std::max(1.0, A.cwiseAbs().maxCoeff());
}

inline QuadraticFormQ build_qsigma(const CostSpec& c, const std::vector<Point>& sigma) {
  QuadraticFormQ q;
  q.L = measures::cost_matrix(c, sigma);
  q.diag_infinite = !std::isfinite(c.ell_at_zero());
  for (std::size_t i = 0; i < q.L.size(); ++i)
    for (std::size_t j = 0; j < q.L.size(); ++j)
      if (i != j && !std::isfinite(q.L[i][j])) throw std::invalid_argument("coincident support points with singular cost");
  q.psd = !q.diag_infinite && is_psd(q.L);
  return q;
}

inline constexpr std::size_t kLatticeCap = 2000000;

// All k in N^m with |k| <= N (or k in {0,1}^m), lexicographic order.
inline std::vector<std::vector<int>> enumerate_lattice(std::size_t m, int N, bool binary = false) {
  // count first so we can refuse before allocating
  double count = 1.0;
  if (binary) {
    count = std::pow(2.0, static_cast<double>(m));
  } else {
    for (std::size_t i = 1; i <= m; ++i) count = count * (N + static_cast<double>(i)) / static_cast<double>(i);
  }
  if (count > static_cast<double>(kLatticeCap))
    throw std::invalid_argument("lattice has " + std::to_string(static_cast<long long>(count)) +
                                " states (cap 2e6); reduce the number of atoms or N");
  std::vector<std::vector<int>> out;
  std::vector<int> k(m, 0);
  const int top = binary ? 1 : N;
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i == m) {
      out.push_back(k);
      return;
    }
    for (int v = 0; v <= std::min(top, left); ++v) {
      k[i] = v;
      rec(i + 1, left - v);
    }
    k[i] = 0;
  };
  rec(0, N);
  return out;
}

// sum_i k_i(k_i-1) L_ii + sum_{i != j} k_i k_j L_ij ; the self-interaction-free part of q(k)
template <class T>
T reduced_q(const Mat<T>& L, const std::vector<int>& k) {
  T s(0);
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] == 0) continue;
    if (k[i] > 1) s += T(k[i]) * T(k[i] - 1) * L[i][i];
    for (std::size_t j = 0; j < k.size(); ++j)
      if (j != i && k[j] != 0) s += T(k[i]) * T(k[j]) * L[i][j];
  }
  return s;
}

template <class T>
struct PlanSolution {
  bool feasible = false;
  T objective{};  // sum gamma(k) * reduced_q(k)
  std::vector<std::vector<int>> support;
  std::vector<T> weights;
  bool alternative_optima = false;
};

// LP over symmetric plans: variables gamma(k), marginal sum gamma(k) k = target, total 1.
template <class T>
PlanSolution<T> solve_symmetric_plan(const Mat<T>& L, const std::vector<T>& target, int N, bool binary,
                                     bool only_full, const convex::LpOptions& opt = {}) {
  const std::size_t m = L.size();
  auto lattice = enumerate_lattice(m, N, binary);
  std::vector<std::vector<int>> ks;
  for (auto& k : lattice) {
    int tot = 0;
    for (int v : k) tot += v;
    if (only_full && tot != N) continue;
    ks.push_back(std::move(k));
  }
  convex::LinearProgram<T> lp;
  lp.objective.reserve(ks.size());
  lp.A.assign(m + 1, std::vector<T>(ks.size(), T(0)));
  lp.b.assign(m + 1, T(0));
  for (std::size_t c = 0; c < ks.size(); ++c) {
    lp.objective.push_back(reduced_q(L, ks[c]));
    for (std::size_t i = 0; i < m; ++i) lp.A[i][c] = T(ks[c][i]);
    lp.A[m][c] = T(1);
  }
  for (std::size_t i = 0; i < m; ++i) lp.b[i] = target[i];
  lp.b[m] = T(1);
  auto res = convex::lp_solve(lp, opt);
  PlanSolution<T> out;
  if (res.status != convex::LpStatus::optimal) return out;
  out.feasible = true;
  out.objective = res.value;
  out.alternative_optima = res.alternative_optima;
  for (auto c : res.basis) {
    if constexpr (convex::ScalarOps<T>::exact) {
      if (res.x[c] == T(0)) continue;
    } else {
      if (res.x[c] <= 1e-12) continue;  // round-off in degenerate bases
    }
    out.support.push_back(ks[c]);
    out.weights.push_back(res.x[c]);
  }
  return out;
}

struct FSigmaResult {
  double value = kInf;            // f_Sigma^(N)(t)
  double value_envelope = kInf;   // same through envelope_eval on (k, q(k)) data
  bool agree = true;
  std::vector<std::vector<int>> support;
  std::vector<double> gamma;
};

inline FSigmaResult f_sigma_N(const QuadraticFormQ& q, int N, const std::vector<double>& t) {
  FSigmaResult out;
  double tot = 0.0;
  for (double x : t) {
    if (x < -1e-12) throw std::invalid_argument("f_sigma_N target must be nonnegative");
    tot += x;
  }
  if (tot > N + 1e-9) return out;
  const bool binary = q.diag_infinite;
  auto sol = solve_symmetric_plan<double>(q.L, t, N, binary, false);
  if (!sol.feasible) return out;
  // sum gamma q(k) = sum gamma reduced_q(k) + l(0) |t|  (self terms k_i L_ii)
  out.value = sol.objective;
  if (!binary) {
    double self = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) self += q.L[i][i] * t[i];
    out.value = sol.objective + self;
  }
  out.support = sol.support;
  out.gamma = sol.weights;
  convex::LatticeFunction<double> data;
  for (auto& k : enumerate_lattice(q.m(), N, binary)) {
    std::vector<double> p(k.begin(), k.end());
    data.add(p, binary ? reduced_q(q.L, k) : q.value(p));
  }
  out.value_envelope = convex::envelope_eval(data, t).as_double();
  out.agree = std::abs(out.value - out.value_envelope) <= 1e-9 * std::max(1.0, std::abs(out.value));
  return out;
}

struct Stratification {
  std::vector<double> a;               // a[K], K = 0..N (a[0] is the mass sent to infinity)
  std::vector<DiscreteMeasure> rho;    // rho[K] probability on the support (empty when a[K] = 0)
  int K_min = 0, K_max = 0;            // over the support of gamma, |k| = 0 included
};

struct RelaxedResult {
  double value = kInf;
  Stratification strat;
  std::vector<std::vector<int>> support;
  std::vector<double> gamma;
  bool alternative_optima = false;
};

enum class CollisionMode { standard, no_collision };

inline Stratification stratify(const DiscreteMeasure& rho, int N, const std::vector<std::vector<int>>& support,
                               const std::vector<double>& gamma) {
  Stratification st;
  const std::size_t m = rho.size();
  st.a.assign(N + 1, 0.0);
  std::vector<std::vector<double>> w(N + 1, std::vector<double>(m, 0.0));
  st.K_min = N + 1;
  st.K_max = -1;
  for (std::size_t s = 0; s < support.size(); ++s) {
    int K = 0;
    for (int v : support[s]) K += v;
    if (gamma[s] <= 0.0) continue;
    st.a[K] += gamma[s];
    st.K_min = std::min(st.K_min, K);
    st.K_max = std::max(st.K_max, K);
    if (K > 0)
      for (std::size_t i = 0; i < m; ++i) w[K][i] += gamma[s] * support[s][i] / K;
  }
  st.rho.resize(N + 1);
  for (int K = 1; K <= N; ++K) {
    if (st.a[K] <= 0.0) continue;
    std::vector<double> ms(m);
    for (std::size_t i = 0; i < m; ++i) ms[i] = w[K][i] / st.a[K];
    double tot = 0.0;
    for (double x : ms) tot += x;
    for (double& x : ms) x /= tot;  // remove rounding drift
    st.rho[K] = DiscreteMeasure(rho.dim(), rho.points(), ms, 1e-9);
  }
  if (st.K_max < 0) st.K_min = st.K_max = 0;
  return st;
}

inline RelaxedResult relaxed_CN(const CostSpec& c, const DiscreteMeasure& rho, int N,
                                CollisionMode mode = CollisionMode::standard) {
  if (N < 2) throw std::invalid_argument("N must be at least 2");
  if (rho.total_mass() > 1.0 + rho.mass_tol()) throw std::invalid_argument("total mass exceeds 1");
  const bool singular = !std::isfinite(c.ell_at_zero());
  if (singular && mode == CollisionMode::standard)
    throw std::invalid_argument("l(0) = +inf: use the no-collision mode (k_i <= 1)");
  RelaxedResult out;
  if (rho.size() == 0) {
    out.value = 0.0;
    out.strat.a.assign(N + 1, 0.0);
    out.strat.a[0] = 1.0;
    out.strat.rho.resize(N + 1);
    return out;
  }
  auto q = build_qsigma(c, rho.points());
  std::vector<double> target(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) target[i] = N * rho.masses()[i];
  auto sol = solve_symmetric_plan<double>(q.L, target, N, mode == CollisionMode::no_collision, false);
  if (!sol.feasible) return out;  // +inf: collisions forced
  out.value = sol.objective / (static_cast<double>(N) * (N - 1));
  out.support = sol.support;
  out.gamma = sol.weights;
  out.alternative_optima = sol.alternative_optima;
  out.strat = stratify(rho, N, sol.support, sol.weights);
  return out;
}

// Exact rational relaxed cost from a cost matrix and a mass vector.
inline Rational relaxed_CN_exact(const Mat<Rational>& L, const std::vector<Rational>& s, int N,
                                 bool no_collision = false) {
  std::vector<Rational> target(s.size());
  Rational tot(0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    target[i] = s[i] * N;
    tot += s[i];
  }
  if (tot > 1) throw std::invalid_argument("total mass exceeds 1");
  auto sol = solve_symmetric_plan<Rational>(L, target, N, no_collision, false);
  if (!sol.feasible) throw NumericalError("exact relaxed program infeasible");
  return sol.objective / Rational(N * (N - 1));
}

inline double exact_CN_probability(const CostSpec& c, const DiscreteMeasure& rho, int N) {
  if (N < 2) throw std::invalid_argument("N must be at least 2");
  if (!rho.is_probability(1e-9)) throw std::invalid_argument("C_N needs a probability measure");
  auto q = build_qsigma(c, rho.points());
  std::vector<double> target(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) target[i] = N * rho.masses()[i];
  auto sol = solve_symmetric_plan<double>(q.L, target, N, q.diag_infinite, true);
  if (!sol.feasible) return kInf;
  return sol.objective / (static_cast<double>(N) * (N - 1));
}

// Cost of the lattice-quantised measure sum k_i/N delta_i when q is psd.
template <class T>
T lattice_formula(const Mat<T>& L, const std::vector<int>& k, int N) {
  return reduced_q(L, k) / T(N * (N - 1));
}

namespace detail {
inline long floor_int(double x) { return static_cast<long>(std::floor(x)); }
inline long floor_int(const Rational& x) {
  boost::multiprecision::mpz_int q = numerator(x) / denominator(x);
  if (x < 0 && q * denominator(x) != numerator(x)) q -= 1;
  return q.convert_to<long>();
}
}  // namespace detail

// Closed form for two atoms: triangulated interpolant of the lattice values.
template <class T>
T two_dirac_closed_form(const T& L0, const T& L1_in, const T& s, const T& t, int N) {
  if (s < 0 || t < 0) throw std::invalid_argument("masses must be nonnegative");
  const T L1 = L1_in < L0 ? L1_in : L0;
  auto g = [&](long k, long l) { return L0 * T(k * k + l * l) + T(2) * L1 * T(k * l); };
  const T u = s * N, v = t * N;
  const long k = detail::floor_int(u), l = detail::floor_int(v);
  const T a = u - T(k), b = v - T(l);
  T val;
  if (a + b <= 1)
    val = g(k, l) * (T(1) - a - b) + g(k + 1, l) * a + g(k, l + 1) * b;
  else
    val = g(k + 1, l + 1) * (a + b - T(1)) + g(k + 1, l) * (T(1) - b) + g(k, l + 1) * (T(1) - a);
  return val / T(N * (N - 1)) - L0 * (s + t) / T(N - 1);
}

struct GapRow {
  int N;
  double theta;
  double kmin_over_N;
  double kmax_over_N;
  double value;
  bool alternative_optima;
};

inline std::vector<GapRow> gap_scan(const CostSpec& c, const DiscreteMeasure& rho, const std::vector<double>& thetas,
                                    const std::vector<int>& Ns, int workers = 1) {
  if (!std::isfinite(c.ell_at_zero())) throw std::invalid_argument("gap scan needs l(0) < +inf");
  std::vector<std::pair<int, double>> cells;
  for (int N : Ns)
    for (double th : thetas) cells.emplace_back(N, th);
  return parallel_map<GapRow>(cells.size(), workers, [&](std::size_t i) {
    auto [N, th] = cells[i];
    auto r = relaxed_CN(c, rho.scaled(th), N);
    return GapRow{N, th, static_cast<double>(r.strat.K_min) / N, static_cast<double>(r.strat.K_max) / N, r.value,
                  r.alternative_optima};
  });
}

struct MonotonicityReport {
  std::vector<int> Ns;
  std::vector<double> values;
  bool ok = true;
  int witness_N = -1;  // first N where C_{N+1} < C_N - slack
};

inline MonotonicityReport monotonicity_check(const CostSpec& c, const DiscreteMeasure& rho, int N_lo, int N_hi,
                                             double slack = 1e-9) {
  MonotonicityReport rep;
  for (int N = N_lo; N <= N_hi; ++N) {
    rep.Ns.push_back(N);
    rep.values.push_back(relaxed_CN(c, rho, N).value);
  }
  for (std::size_t i = 1; i < rep.values.size(); ++i)
    if (rep.values[i] < rep.values[i - 1] - slack) {
      rep.ok = false;
      rep.witness_N = rep.Ns[i - 1];
      break;
    }
  return rep;
}

}  // namespace rmot::mmot
