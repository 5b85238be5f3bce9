#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmot/common.hpp"
#include "rmot/duality.hpp"
#include "rmot/measures.hpp"
#include "rmot/mmot.hpp"
#include "rmot/qp.hpp"

namespace rmot::energy {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using measures::CostSpec;
using measures::DiscreteMeasure;
using measures::Point;
using measures::Tri;

inline double u_rho(const CostSpec& c, const DiscreteMeasure& rho, const Point& x) {
  double s = 0.0;
  for (std::size_t j = 0; j < rho.size(); ++j) s += weighted(rho.masses()[j], c.eval(measures::distance(x, rho.points()[j])));
  return s;
}

struct EnergyReport {
  double D = kInf;
  double D2 = kInf;
  std::vector<double> u;  // u_rho at the requested points
  Tri psd = Tri::unknown;  // of the cost matrix on the support
};

inline EnergyReport direct_energy(const CostSpec& c, const DiscreteMeasure& rho, const std::vector<Point>& probes = {},
                                  double mass_tol = 1e-9) {
  EnergyReport rep;
  double d2 = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i)
    for (std::size_t j = 0; j < rho.size(); ++j)
      d2 += weighted(rho.masses()[i] * rho.masses()[j],
                     c.eval(i == j ? 0.0 : measures::distance(rho.points()[i], rho.points()[j])));
  rep.D2 = d2;
  rep.D = std::abs(rho.total_mass() - 1.0) <= mass_tol ? d2 : kInf;
  for (const auto& x : probes) rep.u.push_back(u_rho(c, rho, x));
  auto L = measures::cost_matrix(c, rho.points());
  bool finite = true;
  for (auto& row : L)
    for (double x : row) finite = finite && std::isfinite(x);
  if (finite) rep.psd = mmot::is_psd(L) ? Tri::yes : Tri::no;
  return rep;
}

struct CInftyReport {
  std::vector<int> Ns;
  std::vector<double> values;  // relaxed costs, nondecreasing in N
  double estimate = 0.0;       // largest computed value (a lower bound for the limit)
  double extrapolated = 0.0;   // a + b/N fit through N_max/2 and N_max
  double D2 = 0.0;
  bool psd = false;
  bool agrees = false;         // psd and D2 - estimate within the l(0)||rho||/(N-1) bound
  bool prefix_only = false;    // all computed values vanish while the mass is positive
};

inline CInftyReport C_infty_estimate(const CostSpec& c, const DiscreteMeasure& rho, int N_max, int workers = 1) {
  if (N_max < 2) throw std::invalid_argument("N_max must be at least 2");
  if (!std::isfinite(c.ell_at_zero())) throw std::invalid_argument("C_infinity estimate needs l(0) < +inf");
  CInftyReport rep;
  for (int N = 2; N <= N_max; ++N) rep.Ns.push_back(N);
  rep.values = parallel_map<double>(rep.Ns.size(), workers,
                                    [&](std::size_t i) { return mmot::relaxed_CN(c, rho, rep.Ns[i]).value; });
  rep.estimate = *std::max_element(rep.values.begin(), rep.values.end());
  int M = std::max(2, N_max / 2);
  double cm = rep.values[M - 2], cn = rep.values.back();
  rep.extrapolated = M == N_max ? cn : (N_max * cn - M * cm) / double(N_max - M);
  auto er = direct_energy(c, rho);
  rep.D2 = er.D2;
  rep.psd = er.psd == Tri::yes;
  double gap = rep.D2 - rep.estimate;
  rep.agrees = rep.psd && gap >= -1e-9 && gap <= c.ell_at_zero() * rho.total_mass() / (N_max - 1) + 1e-9;
  rep.prefix_only = rep.estimate == 0.0 && rho.total_mass() > 0.0;
  return rep;
}

// sum_i w_i D2(Q_i) after checking sum_i w_i Q_i = target
inline double mixture_value(const CostSpec& c, const std::vector<std::pair<double, DiscreteMeasure>>& comps,
                            const DiscreteMeasure& target, double tol = 1e-9) {
  double wsum = 0.0;
  std::vector<Point> pts;
  std::vector<double> acc;
  auto add = [&](const Point& p, double m) {
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (measures::distance(pts[i], p) <= 1e-12) {
        acc[i] += m;
        return;
      }
    pts.push_back(p);
    acc.push_back(m);
  };
  double value = 0.0;
  for (const auto& [w, Q] : comps) {
    if (w < 0) throw std::invalid_argument("mixture weights must be nonnegative");
    wsum += w;
    for (std::size_t i = 0; i < Q.size(); ++i) add(Q.points()[i], w * Q.masses()[i]);
    value += weighted(w, direct_energy(c, Q).D2);
  }
  if (std::abs(wsum - 1.0) > tol) throw std::invalid_argument("mixture weights must sum to 1");
  for (std::size_t i = 0; i < target.size(); ++i) add(target.points()[i], -target.masses()[i]);
  for (double r : acc)
    if (std::abs(r) > tol) throw std::invalid_argument("barycenter of the mixture does not match the target");
  return value;
}

struct OptimalityReport {
  double c_lambda = 0.0;
  double mass = 0.0;
  double residual = 0.0;         // max over support of |u - (lambda/2) v - c|
  bool c_nonpositive = false;
  bool complementary = false;    // c (1 - mass) >= 0
  double probe_violation = 0.0;  // max over probes of (c - (u - (lambda/2) v))_+
  bool ok(double tol) const { return residual <= tol && c_nonpositive && complementary && probe_violation <= tol; }
};

// Nodes with zero mass act as probe points.
inline OptimalityReport optimality_residuals(const MatrixXd& L, const VectorXd& v, double lambda, const VectorXd& rho,
                                             double sign_tol = 1e-9) {
  OptimalityReport rep;
  rep.mass = rho.sum();
  if (!(rep.mass > 0)) throw std::invalid_argument("optimality conditions need a nonzero measure");
  VectorXd u = L * rho;
  VectorXd h = u - 0.5 * lambda * v;
  rep.c_lambda = h.dot(rho) / rep.mass;
  for (Eigen::Index i = 0; i < rho.size(); ++i) {
    if (rho(i) > 0) rep.residual = std::max(rep.residual, std::abs(h(i) - rep.c_lambda));
    else rep.probe_violation = std::max(rep.probe_violation, rep.c_lambda - h(i));
  }
  rep.c_nonpositive = rep.c_lambda <= sign_tol;
  rep.complementary = rep.c_lambda * (1.0 - rep.mass) >= -sign_tol;
  return rep;
}

inline OptimalityReport optimality_residuals(const CostSpec& c, const std::function<double(const Point&)>& v,
                                             double lambda, const DiscreteMeasure& rho,
                                             const std::vector<Point>& probes = {}) {
  std::vector<Point> pts = rho.points();
  for (const auto& p : probes) pts.push_back(p);
  const auto n = static_cast<Eigen::Index>(pts.size());
  MatrixXd L(n, n);
  VectorXd vv(n), r = VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    vv(i) = v(pts[i]);
    if (i < static_cast<Eigen::Index>(rho.size())) r(i) = rho.masses()[i];
    for (Eigen::Index j = 0; j < n; ++j) L(i, j) = c.eval(i == j ? 0.0 : measures::distance(pts[i], pts[j]));
  }
  // 0 * inf = 0 for the probe columns
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (!std::isfinite(L(i, j)) && r(j) == 0.0) L(i, j) = 0.0;
  if (!L.allFinite()) throw std::invalid_argument("D2 is infinite for this candidate");
  return optimality_residuals(L, vv, lambda, r);
}

struct SlambdaResult {
  VectorXd rho;
  double mass = 0.0;
  double value = 0.0;     // D2(rho) - lambda <v, rho>
  double M_infty = 0.0;   // = -value
  double c_lambda = 0.0;
  double residual = 0.0;
  bool certified = false;
};

// minimise D2(rho) - lambda <v, rho> over grid sub-probabilities
inline SlambdaResult grid_minimize_Slambda(const duality::GridProblem& p, double lambda, const qp::QpOptions& opt = {}) {
  SlambdaResult out;
  if (lambda == 0.0) {
    out.rho = VectorXd::Zero(static_cast<Eigen::Index>(p.size()));
    out.certified = true;
    return out;
  }
  auto r = qp::maximize_on_capped_simplex(p.L, lambda * p.v, opt);
  out.rho = r.x;
  out.mass = r.x.sum();
  out.M_infty = r.value;
  out.value = -r.value;
  out.certified = r.psd && r.certified;
  if (out.mass > 0) {
    auto o = optimality_residuals(p.L, p.v, lambda, r.x);
    out.c_lambda = o.c_lambda;
    out.residual = o.residual;
  }
  return out;
}

struct LambdaRow {
  double lambda, mass, value, c_lambda, residual;
  bool certified;
};

inline std::vector<LambdaRow> lambda_scan(const duality::GridProblem& p, const std::vector<double>& lambdas,
                                          int workers = 1) {
  return parallel_map<LambdaRow>(lambdas.size(), workers, [&](std::size_t i) {
    auto s = grid_minimize_Slambda(p, lambdas[i]);
    return LambdaRow{lambdas[i], s.mass, s.value, s.c_lambda, s.residual, s.certified};
  });
}

struct KappaScan {
  std::vector<double> lambdas, masses, ratios;  // ratios = M_infty / lambda^2
  double K = 0.0;                               // ratio at the smallest lambda
  double kappa = kInf;                          // largest lambda with ratio within 1e-6 K (inf if none)
};

inline KappaScan kappa_scan(const duality::GridProblem& p, std::vector<double> lambdas, int workers = 1) {
  std::sort(lambdas.begin(), lambdas.end());
  KappaScan ks;
  ks.lambdas = lambdas;
  auto rows = parallel_map<SlambdaResult>(lambdas.size(), workers,
                                          [&](std::size_t i) { return grid_minimize_Slambda(p, lambdas[i]); });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ks.masses.push_back(rows[i].mass);
    ks.ratios.push_back(rows[i].M_infty / (lambdas[i] * lambdas[i]));
  }
  if (ks.ratios.empty()) return ks;
  ks.K = ks.ratios.front();
  ks.kappa = -kInf;
  for (std::size_t i = 0; i < ks.ratios.size(); ++i)
    if (std::abs(ks.ratios[i] - ks.K) < 1e-6 * ks.K) ks.kappa = lambdas[i];
  return ks;
}

struct ThresholdReport {
  double alpha_v = kInf;
  double beta_v = 0.0;             // window estimate of the liminf
  double lambda_lower = 0.0;       // lambda_* >= 2 / alpha_v
  double lambda_upper = kInf;      // lambda^* <= 2 / beta_v (only when the slow-decay condition holds)
  bool beta_bound_refused = false;
  std::string note;
  std::optional<KappaScan> scan;
  bool ordered = true;             // lambda_lower <= kappa <= lambda_upper when finite
};

// Decay slow enough for the beta-based confinement bound: Riesz r^{-p} with p < d.
inline bool slow_decay_condition(const CostSpec& c, int dim) {
  if (c.kind() == measures::CostKind::coulomb) return dim > 1;
  if (c.kind() == measures::CostKind::riesz) return c.param() < dim;
  if (c.kind() == measures::CostKind::truncated) return slow_decay_condition(*c.base(), dim);
  return false;
}

// v is radial, v(x) = vr(|x|), sampled on the given radii; beta uses radii within [R0, R1].
inline ThresholdReport threshold_bounds(const CostSpec& c, int dim, const std::function<double(double)>& vr,
                                        const std::vector<double>& radii, double R0, double R1,
                                        const duality::GridProblem* scan_problem = nullptr,
                                        const std::vector<double>& scan_lambdas = {}) {
  if (!(R1 > R0) || !(R0 > 0) || R1 < 2.0 * R0) throw std::invalid_argument("tail window too short (need R1 >= 2 R0 > 0)");
  ThresholdReport rep;
  rep.alpha_v = 0.0;
  for (double r : radii) {
    if (!(r > 0)) continue;
    double vv = vr(r);
    if (vv <= 0) continue;
    double lo = measures::monotone_envelopes(c, 2.0 * r).lower;
    rep.alpha_v = std::max(rep.alpha_v, lo > 0 ? vv / lo : kInf);
  }
  rep.lambda_lower = rep.alpha_v > 0 ? 2.0 / rep.alpha_v : kInf;
  rep.beta_v = kInf;
  int used = 0;
  const int samples = 200;
  for (int i = 0; i <= samples; ++i) {
    double r = R0 * std::pow(R1 / R0, double(i) / samples);
    double hi = measures::monotone_envelopes(c, r).upper;
    double ratio = hi > 0 ? vr(r) / hi : kInf;
    rep.beta_v = std::min(rep.beta_v, ratio);
    ++used;
  }
  if (!used) throw std::invalid_argument("tail window has no samples");
  if (!slow_decay_condition(c, dim)) {
    rep.beta_bound_refused = true;
    rep.note = "cost decays too fast at infinity: the beta-based upper bound does not apply";
  } else {
    rep.lambda_upper = rep.beta_v > 0 ? 2.0 / rep.beta_v : kInf;
    rep.note = "beta_v is a window estimate over [R0, R1]";
  }
  if (scan_problem && !scan_lambdas.empty()) {
    rep.scan = kappa_scan(*scan_problem, scan_lambdas);
    double k = rep.scan->kappa;
    if (std::isfinite(k) && std::isfinite(rep.lambda_lower)) rep.ordered = rep.ordered && rep.lambda_lower <= k * (1 + 1e-6);
    if (std::isfinite(k) && std::isfinite(rep.lambda_upper)) rep.ordered = rep.ordered && k <= rep.lambda_upper * (1 + 1e-6);
  }
  return rep;
}

}  // namespace rmot::energy
