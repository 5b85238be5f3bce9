#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rmot/common.hpp"

// Radial problem for the 3-d Coulomb cost and v(x) = V(|x|).
namespace rmot::radial {

inline constexpr double kRMax = 1e12;  // numerical stand-in for r = +inf
inline constexpr double kJumpTol = 1e-8;

// integral of f over [a, b], split at the given points; b may be +inf (mapped by r = a + s/(1-s))
inline double integrate(const std::function<double(double)>& f, double a, double b, std::vector<double> cuts = {},
                        double tol = 1e-13) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  if (!(b > a)) return 0.0;
  cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [&](double c) { return !(c > a && c < b); }), cuts.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<double> pts{a};
  pts.insert(pts.end(), cuts.begin(), cuts.end());
  pts.push_back(b);
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double lo = pts[i], hi = pts[i + 1];
    if (std::isinf(hi)) {
      auto g = [&](double u) {
        if (u >= 1.0) return 0.0;
        double w = 1.0 - u;
        return f(lo + u / w) / (w * w);
      };
      s += GK::integrate(g, 0.0, 1.0, 10, tol);
    } else {
      s += GK::integrate(f, lo, hi, 10, tol);
    }
  }
  return s;
}

struct RadialPotential {
  std::string name;
  std::function<double(double)> V;
  std::function<double(double)> dV_left;   // optional analytic one-sided derivatives
  std::function<double(double)> dV_right;
  std::vector<double> breakpoints;
  double support = kInf;                   // sup{V > 0}
  std::function<double(double)> closed_form;   // lambda -> M_infty(lambda v), when known
  std::function<double(double)> printed_form;  // the published expression, kept for comparison

  double left_derivative(double r) const {
    if (dV_left) return dV_left(r);
    return numeric_derivative(r, -1);
  }
  double right_derivative(double r) const {
    if (dV_right) return dV_right(r);
    return numeric_derivative(r, +1);
  }
  // -r^2 V'(r -+ 0)
  double g_left(double r) const { return r > 0 ? -r * r * left_derivative(r) : 0.0; }
  double g_right(double r) const { return -r * r * right_derivative(r); }

 private:
  double numeric_derivative(double r, int side) const {
    const double h = 1e-6 * std::max(1.0, r);
    for (double b : breakpoints) {
      if (std::abs(r - b) <= 1e-12 * std::max(1.0, b))
        return side < 0 ? (V(r) - V(r - h)) / h : (V(r + h) - V(r)) / h;
      if (std::abs(r - b) < h) return r < b ? (V(r) - V(std::max(0.0, r - h))) / std::min(h, r) : (V(r + h) - V(r)) / h;
    }
    if (r < h) return (V(r + h) - V(r)) / h;
    return (V(r + h) - V(r - h)) / (2.0 * h);
  }
};

inline RadialPotential catalog(const std::string& name) {
  RadialPotential p;
  p.name = name;
  if (name == "v1") {
    p.V = [](double r) { return std::max(0.0, 1.0 - r * r); };
    p.dV_left = [](double r) { return r <= 1.0 ? -2.0 * r : 0.0; };
    p.dV_right = [](double r) { return r < 1.0 ? -2.0 * r : 0.0; };
    p.breakpoints = {1.0};
    p.support = 1.0;
    p.closed_form = [](double l) {
      const double lv = 3.0 * std::sqrt(3.0);
      return l <= lv ? 2.0 * l * l / (15.0 * std::sqrt(3.0)) : l - 1.8 * std::cbrt(l);
    };
  } else if (name == "v2") {
    p.V = [](double r) { return r < 1.0 ? 1.0 : 1.0 / r; };
    p.dV_left = [](double r) { return r <= 1.0 ? 0.0 : -1.0 / (r * r); };
    p.dV_right = [](double r) { return r < 1.0 ? 0.0 : -1.0 / (r * r); };
    p.breakpoints = {1.0};
    p.closed_form = [](double l) { return l <= 2.0 ? l * l / 4.0 : l - 1.0; };
  } else if (name == "v3") {
    p.V = [](double r) { return 1.0 / (1.0 + r); };
    p.dV_left = p.dV_right = [](double r) { return -1.0 / ((1.0 + r) * (1.0 + r)); };
    // direct evaluation gives s/3 where the published form has 1/(3s); they agree only at lambda = 2
    p.closed_form = [](double l) {
      if (l <= 2.0) return l * l / 12.0;
      double s = std::sqrt(l / 2.0);
      return l + 1.0 - 3.0 * s + s / 3.0;
    };
    p.printed_form = [](double l) {
      if (l <= 2.0) return l * l / 12.0;
      double s = std::sqrt(l / 2.0);
      return l + 1.0 - 3.0 * s + 1.0 / (3.0 * s);
    };
  } else if (name == "v4") {
    p.V = [](double r) { return r < 1.0 ? 1.0 : 1.0 / std::sqrt(r); };
    p.dV_left = [](double r) { return r <= 1.0 ? 0.0 : -0.5 * std::pow(r, -1.5); };
    p.dV_right = [](double r) { return r < 1.0 ? 0.0 : -0.5 * std::pow(r, -1.5); };
    p.breakpoints = {1.0};
    p.closed_form = [](double l) {
      return l <= 4.0 ? l * l / 16.0 * std::log(16.0 / (l * l)) + 3.0 * l * l / 16.0 : l - 1.0;
    };
  } else {
    throw std::invalid_argument("unknown potential '" + name + "' (expected v1, v2, v3 or v4)");
  }
  if (!p.printed_form) p.printed_form = p.closed_form;
  return p;
}

// Piecewise linear potential through (r_i, V_i), zero beyond the last knot.
inline RadialPotential tabulated(std::vector<double> rs, std::vector<double> vs, const std::string& name = "table") {
  if (rs.size() != vs.size() || rs.size() < 2) throw std::invalid_argument("tabulated potential needs >= 2 knots");
  if (rs.front() != 0.0) throw std::invalid_argument("tabulated potential must start at r = 0");
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (i && !(rs[i] > rs[i - 1])) throw std::invalid_argument("tabulated radii must increase");
    if (!(vs[i] >= 0) || !std::isfinite(vs[i])) throw std::invalid_argument("tabulated values must be finite and >= 0");
  }
  auto R = std::make_shared<std::vector<double>>(std::move(rs));
  auto Vv = std::make_shared<std::vector<double>>(std::move(vs));
  auto slope = [R, Vv](std::size_t i) { return ((*Vv)[i + 1] - (*Vv)[i]) / ((*R)[i + 1] - (*R)[i]); };
  RadialPotential p;
  p.name = name;
  p.V = [R, Vv](double r) {
    if (r >= R->back()) return r == R->back() ? Vv->back() : 0.0;
    auto it = std::upper_bound(R->begin(), R->end(), r);
    std::size_t i = static_cast<std::size_t>(it - R->begin()) - 1;
    double t = (r - (*R)[i]) / ((*R)[i + 1] - (*R)[i]);
    return (*Vv)[i] + t * ((*Vv)[i + 1] - (*Vv)[i]);
  };
  p.dV_left = [R, slope](double r) {
    if (r <= 0.0 || r > R->back()) return 0.0;
    auto it = std::lower_bound(R->begin(), R->end(), r);
    return slope(static_cast<std::size_t>(it - R->begin()) - 1);
  };
  p.dV_right = [R, slope](double r) {
    if (r >= R->back()) return 0.0;
    auto it = std::upper_bound(R->begin(), R->end(), r);
    return slope(static_cast<std::size_t>(it - R->begin()) - 1);
  };
  p.breakpoints.assign(R->begin() + 1, R->end());
  p.support = R->back();
  for (std::size_t i = Vv->size(); i-- > 0;) {
    if ((*Vv)[i] > 0) break;
    p.support = (*R)[i];
  }
  return p;
}

// Two columns "r V" per line; '#' starts a comment.
inline RadialPotential load_tabulated(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open potential file " + path);
  std::vector<double> rs, vs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto h = line.find('#');
    if (h != std::string::npos) line.resize(h);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double r, v;
    if (!(ss >> r)) continue;
    if (!(ss >> v)) throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected two numbers");
    rs.push_back(r);
    vs.push_back(v);
  }
  return tabulated(rs, vs, path);
}

inline std::vector<double> log_grid(double lo, double hi, int per_decade, const std::vector<double>& extra = {}) {
  std::vector<double> g;
  int n = static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade));
  for (int i = 0; i <= n; ++i) g.push_back(lo * std::pow(hi / lo, double(i) / n));
  for (double e : extra)
    if (e >= lo && e <= hi) g.push_back(e);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

struct HypothesisReport {
  bool nonnegative = true;
  bool continuous = true;
  bool vanishing = true;
  bool monotone_g = true;  // -r^2 V' nondecreasing on {V > 0}
  bool ok() const { return nonnegative && monotone_g && vanishing; }
};

inline HypothesisReport check_hypotheses(const RadialPotential& p, double tail_tol = 1e-6) {
  HypothesisReport h;
  double v0 = p.V(0.0);
  double hi = std::min(p.support, 1e6);
  auto grid = log_grid(1e-6, hi, 50, p.breakpoints);
  double prev = 0.0, scale = 1.0;
  for (double r : grid) {
    double v = p.V(r);
    if (v < 0) h.nonnegative = false;
    if (v <= 1e-14 * std::max(1.0, v0)) continue;
    for (double g : {p.g_left(r), p.g_right(r)}) {
      scale = std::max(scale, std::abs(g));
      if (g < prev - 1e-9 * scale) h.monotone_g = false;
      prev = std::max(prev, g);
    }
  }
  for (double b : p.breakpoints) {
    double e = 1e-9 * std::max(1.0, b);
    if (std::abs(p.V(b - e) - p.V(b + e)) > 1e-6 * std::max(1.0, v0)) h.continuous = false;
  }
  h.vanishing = p.V(kRMax) <= tail_tol * std::max(1.0, v0);
  return h;
}

struct RadialConstants {
  double alpha = 0.0;
  double lambda_V = 0.0;
  double r_star = kInf;
  double r_zero = 0.0;
  double gamma = 0.0;  // sup of -r^2 V', equal to alpha under the hypothesis
};

namespace detail {

// sup{r in (lo, hi] : pred(r)} for a predicate true at lo and false at hi
template <class P>
double bisect(double lo, double hi, P pred) {
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++i) {
    double mid = 0.5 * (lo + hi);
    (pred(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double snap(double x, const std::vector<double>& bps) {
  for (double b : bps)
    if (std::abs(x - b) <= 1e-12 * std::max(1.0, b)) return b;
  return x;
}

// limit of f at infinity from decades 1e6..1e12: finite, or +inf when the increments do not shrink
inline double tail_limit(const std::function<double(double)>& f) {
  std::vector<double> a;
  for (int k = 6; k <= 12; ++k) a.push_back(f(std::pow(10.0, k)));
  std::size_t n = a.size();
  double d1 = a[n - 2] - a[n - 3], d2 = a[n - 1] - a[n - 2];
  double scale = std::max(1.0, std::abs(a[n - 1]));
  if (std::abs(d2) <= 1e-10 * scale) return a[n - 1];
  if (d2 > 0 && d2 >= 0.5 * d1) return kInf;
  // Aitken on the last three terms
  double den = d2 - d1;
  return den != 0 ? a[n - 1] - d2 * d2 / den : a[n - 1];
}

}  // namespace detail

inline RadialConstants radial_constants(const RadialPotential& p) {
  if (!check_hypotheses(p).ok())
    throw std::invalid_argument("potential violates the monotonicity hypothesis on -r^2 V' (case not addressed)");
  RadialConstants c;
  // (rV)'(r+0) > 0 before r*, relative to V so that slowly decaying tails stay positive
  auto rising = [&](double r) { return p.V(r) + r * p.right_derivative(r) > 1e-13 * p.V(r); };
  auto grid = log_grid(1e-8, kRMax, 40, p.breakpoints);
  std::size_t k = 0;
  while (k < grid.size() && rising(grid[k])) ++k;
  if (k < grid.size()) {
    double lo = k ? grid[k - 1] : 0.0;
    c.r_star = detail::snap(detail::bisect(lo, grid[k], rising), p.breakpoints);
    c.alpha = c.r_star * p.V(c.r_star);
  } else {
    c.r_star = kInf;
    c.alpha = detail::tail_limit([&](double r) { return r * p.V(r); });
  }
  c.lambda_V = c.alpha > 0 ? 2.0 / c.alpha : kInf;
  // r0 = sup{r : V = V(0) on [0, r]}; g vanishes exactly there
  std::size_t j = 0;
  while (j < grid.size() && p.g_left(grid[j]) <= 0.0) ++j;
  if (j == 0) {
    c.r_zero = detail::bisect(0.0, grid[0], [&](double r) { return p.g_left(r) <= 0.0; });
  } else if (j < grid.size()) {
    c.r_zero = detail::snap(detail::bisect(grid[j - 1], grid[j], [&](double r) { return p.g_left(r) <= 0.0; }),
                            p.breakpoints);
  } else {
    c.r_zero = kInf;
  }
  if (c.r_zero < 1e-12) c.r_zero = 0.0;
  c.gamma = 0.0;
  for (double r : grid) c.gamma = std::max(c.gamma, std::max(p.g_left(r), p.g_right(r)));
  if (std::isinf(p.support)) c.gamma = std::max(c.gamma, detail::tail_limit([&](double r) { return p.g_left(r); }));
  return c;
}

// sup{r in (0, support] : -r^2 V'(r-0) < 2/lambda}
inline double zeta(const RadialPotential& p, double lambda, const RadialConstants& c) {
  if (!(lambda > 0)) throw std::invalid_argument("zeta needs lambda > 0");
  const double y = 2.0 / lambda;
  auto below = [&](double r) { return p.g_left(r) < y; };
  if (std::isfinite(p.support)) {
    if (below(p.support)) return p.support;
    return detail::snap(detail::bisect(0.0, p.support, below), p.breakpoints);
  }
  if (y >= c.gamma) return kInf;
  double hi = 1.0;
  while (below(hi)) {
    hi *= 2.0;
    if (hi > kRMax) return kInf;
  }
  return detail::snap(detail::bisect(0.0, hi, below), p.breakpoints);
}

inline double zeta(const RadialPotential& p, double lambda) { return zeta(p, lambda, radial_constants(p)); }

// Radial measure: continuous part with cumulative Fc on [0, r_end] plus explicit atoms (radius, mass).
struct RadialMeasure {
  std::function<double(double)> Fc;
  double r_end = 0.0;
  std::vector<std::pair<double, double>> atoms;
  std::vector<double> breakpoints;

  double F(double r) const {
    double s = Fc ? Fc(std::min(r, r_end)) : 0.0;
    for (const auto& [a, m] : atoms)
      if (a <= r) s += m;
    return s;
  }
  double continuous_mass() const { return Fc ? Fc(r_end) : 0.0; }
  double mass() const {
    double s = continuous_mass();
    for (const auto& am : atoms) s += am.second;
    return s;
  }
  // radius beyond which there is no mass
  double outer_radius() const {
    double R = continuous_mass() > 0 ? r_end : 0.0;
    for (const auto& am : atoms) R = std::max(R, am.first);
    return R;
  }
  std::vector<double> cuts() const {
    std::vector<double> c = breakpoints;
    for (const auto& am : atoms) c.push_back(am.first);
    if (std::isfinite(r_end)) c.push_back(r_end);
    return c;
  }
};

struct RadialSolution {
  double lambda = 0.0;
  bool high_branch = false;  // lambda > lambda_V
  double mass = 0.0;
  double r_lambda = 0.0;
  double c_lambda = 0.0;
  double v_pairing = 0.0;    // <v, rho_lambda>
  double M_infty = 0.0;
  RadialMeasure rho;
};

namespace detail {

// F = k (-r^2 V'(r-0)) on (0, r_end), with jumps of -r^2 V' split off as atoms
inline RadialMeasure build_measure(const RadialPotential& p, double k, double r_end, double terminal_mass,
                                   double g_infinity) {
  RadialMeasure m;
  m.r_end = r_end;
  std::vector<std::pair<double, double>> jumps;
  for (double b : p.breakpoints) {
    if (!(b > 0 && b < r_end)) continue;
    double j = p.g_right(b) - p.g_left(b);
    if (std::abs(j) > kJumpTol) jumps.push_back({b, j});
    m.breakpoints.push_back(b);
  }
  for (const auto& [b, j] : jumps) m.atoms.push_back({b, k * j});
  auto end_value = std::isfinite(r_end) ? p.g_left(r_end) : g_infinity;
  m.Fc = [p, k, r_end, jumps, end_value](double t) {
    if (t <= 0) return 0.0;
    double g, J = 0.0;
    if (t >= r_end) {
      g = end_value;
      for (const auto& bj : jumps) J += bj.second;
    } else {
      g = p.g_right(t);
      for (const auto& bj : jumps)
        if (bj.first <= t) J += bj.second;
    }
    return k * (g - J);
  };
  if (terminal_mass > 1e-15) m.atoms.push_back({r_end, terminal_mass});
  return m;
}

}  // namespace detail

// <v, rho> = -int_0^R F V' dt + F(R) V(R)
inline double pairing(const RadialPotential& p, const RadialMeasure& m) {
  double R = m.r_end;
  auto f = [&](double t) { return -m.F(t) * p.right_derivative(t); };
  double s = integrate(f, 0.0, R, m.cuts());
  if (std::isfinite(R)) s += m.mass() * p.V(R);
  return s;
}

inline RadialSolution solve_radial(const RadialPotential& p, double lambda, const RadialConstants& c) {
  if (!(lambda >= 0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
  RadialSolution s;
  s.lambda = lambda;
  if (lambda == 0.0) {
    s.r_lambda = c.r_star;
    s.rho.r_end = 0.0;
    return s;
  }
  if (lambda > c.lambda_V) {
    s.high_branch = true;
    s.r_lambda = zeta(p, lambda, c);
    if (!std::isfinite(s.r_lambda)) throw NumericalError("effective radius diverged above the threshold");
    double k = 0.5 * lambda;
    double atom = 1.0 - k * p.g_left(s.r_lambda);
    s.rho = detail::build_measure(p, k, s.r_lambda, atom, c.gamma);
    s.v_pairing = pairing(p, s.rho);
    s.c_lambda = 1.0 / s.r_lambda - k * p.V(s.r_lambda);
    s.M_infty = k * s.v_pairing + k * p.V(s.r_lambda) - 1.0 / s.r_lambda;
  } else {
    double scale = lambda / c.lambda_V;
    s.r_lambda = c.r_star;
    double k = scale / c.alpha;
    double atom = std::isfinite(c.r_star) ? scale * (1.0 - p.g_left(c.r_star) / c.alpha) : 0.0;
    s.rho = detail::build_measure(p, k, c.r_star, atom, c.gamma);
    s.v_pairing = pairing(p, s.rho);
    s.c_lambda = 0.0;
    s.M_infty = 0.5 * lambda * s.v_pairing;
  }
  s.mass = s.rho.mass();
  return s;
}

inline RadialSolution solve_radial(const RadialPotential& p, double lambda) {
  return solve_radial(p, lambda, radial_constants(p));
}

// U(r) = int_r^inf F(t)/t^2 dt
inline double potential_from_F(const RadialMeasure& m, double r) {
  if (r < 0) throw std::domain_error("negative radius");
  for (const auto& am : m.atoms)
    if (am.first == 0.0 && am.second > 0 && r == 0.0) return kInf;
  double R = m.outer_radius();
  double M = m.mass();
  if (r >= R) return r > 0 ? M / r : (M > 0 ? kInf : 0.0);
  auto f = [&](double t) { return m.F(t) / (t * t); };
  double s = integrate(f, r, R, m.cuts());
  if (std::isfinite(R)) s += M / R;
  if (!std::isfinite(s)) throw NumericalError("potential integral diverged");
  return s;
}

inline std::vector<double> potential_from_F(const RadialMeasure& m, const std::vector<double>& rs) {
  std::vector<double> out;
  for (double r : rs) out.push_back(potential_from_F(m, r));
  return out;
}

// M_closed is the published expression; rel_err compares against it
struct MassCurveRow {
  double lambda, mass, r_lambda, c_lambda, M_infty, M_closed, rel_err;
};

inline std::vector<MassCurveRow> mass_curve(const RadialPotential& p, const std::vector<double>& lambdas,
                                            int workers = 1) {
  auto c = radial_constants(p);
  return parallel_map<MassCurveRow>(lambdas.size(), workers, [&](std::size_t i) {
    auto s = solve_radial(p, lambdas[i], c);
    double cf = p.printed_form ? p.printed_form(lambdas[i]) : std::nan("");
    double rel = p.printed_form ? std::abs(s.M_infty - cf) / std::max(std::abs(cf), 1e-300) : std::nan("");
    if (p.printed_form && cf == 0.0 && s.M_infty == 0.0) rel = 0.0;
    return MassCurveRow{lambdas[i], s.mass, s.r_lambda, s.c_lambda, s.M_infty, cf, rel};
  });
}

// Spherical layers of a radial measure, with exact Coulomb interactions between them.
struct ShellSystem {
  std::vector<double> radii;   // representative radius of each node
  std::vector<double> masses;  // zero for probe nodes
  Eigen::MatrixXd L;           // u_i = sum_j L_ij m_j is the potential at radii[i]
};

inline ShellSystem discretize_shells(const RadialMeasure& m, int n, const std::vector<double>& probes = {}) {
  if (n < 1) throw std::invalid_argument("need at least one shell");
  const double Mc = m.continuous_mass();
  struct Layer {
    double a, b, mass, rhat;
    bool atom;
  };
  std::vector<Layer> layers;
  for (const auto& [r, w] : m.atoms)
    if (w > 0) layers.push_back({r, r, w, r, true});
  auto integ = [&](double lo, double hi) {
    return integrate([&](double t) { return m.Fc(t) / (t * t); }, lo, hi, m.cuts(), 1e-12);
  };
  auto over = [&](double F, double r) { return r > 0 && std::isfinite(r) ? F / r : 0.0; };
  if (Mc > 1e-15) {
    // equal-mass and equal-radius edges
    auto quantile = [&](double q) {
      double hi = std::isfinite(m.r_end) ? m.r_end : 1.0;
      while (std::isinf(m.r_end) && m.Fc(hi) < q) hi *= 2.0;
      return detail::bisect(0.0, hi, [&](double r) { return m.Fc(r) < q; });
    };
    int nm = std::max(1, n / 2), nr = std::max(1, n - nm);
    std::vector<double> edges{0.0};
    for (int i = 1; i < nm; ++i) edges.push_back(quantile(Mc * i / nm));
    double top = std::isfinite(m.r_end) ? m.r_end : quantile(Mc * (1.0 - 1.0 / nm));
    for (int i = 1; i < nr; ++i) edges.push_back(top * i / nr);
    for (const auto& am : m.atoms) edges.push_back(am.first);
    for (double b : m.breakpoints) edges.push_back(b);
    edges.push_back(m.r_end);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      double a = edges[i], b = edges[i + 1];
      if (b > m.r_end) break;
      double w = m.Fc(b) - m.Fc(a);
      if (w <= 1e-14) continue;
      // int dFc / s, by parts
      double H = over(m.Fc(b), b) - over(m.Fc(a), a) + integ(a, b);
      layers.push_back({a, b, w, w / H, false});
    }
  }
  std::sort(layers.begin(), layers.end(), [](const Layer& x, const Layer& y) { return x.rhat < y.rhat; });
  // exact potential of layer j at radius r
  auto layer_pot = [&](const Layer& Lj, double r) {
    if (Lj.atom || r >= Lj.b) return Lj.mass / std::max(r, Lj.rhat);
    if (r <= Lj.a) return Lj.mass / Lj.rhat;
    return over(m.Fc(Lj.b), Lj.b) - m.Fc(Lj.a) / r + integ(r, Lj.b);
  };
  ShellSystem sys;
  for (const auto& Lj : layers) {
    sys.radii.push_back(Lj.rhat);
    sys.masses.push_back(Lj.mass);
  }
  for (double r : probes) {
    sys.radii.push_back(r);
    sys.masses.push_back(0.0);
  }
  const auto N = static_cast<Eigen::Index>(sys.radii.size());
  sys.L.resize(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) {
      double ri = sys.radii[i];
      if (j < static_cast<Eigen::Index>(layers.size())) sys.L(i, j) = layer_pot(layers[j], ri) / layers[j].mass;
      else sys.L(i, j) = 1.0 / std::max(ri, sys.radii[j]);
    }
  return sys;
}

// Thin shells at fixed radii: interaction 1/max(r_i, r_j) truncated at h.
inline Eigen::MatrixXd shell_kernel(const std::vector<double>& radii, double h) {
  const auto n = static_cast<Eigen::Index>(radii.size());
  Eigen::MatrixXd L(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) L(i, j) = std::min(1.0 / std::max(radii[i], radii[j]), h);
  return L;
}

}  // namespace rmot::radial
