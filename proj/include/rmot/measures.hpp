#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "rmot/common.hpp"

namespace rmot::measures {

using Point = std::vector<double>;

inline double distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  // Coincident atoms (closer than merge_tol) are merged by summing masses.
  DiscreteMeasure(int dim, std::vector<Point> points, std::vector<double> masses, double mass_tol = 1e-12,
                  double merge_tol = 1e-12)
      : dim_(dim), mass_tol_(mass_tol) {
    if (dim <= 0) throw std::invalid_argument("measure dimension must be positive");
    if (points.size() != masses.size()) throw std::invalid_argument("points and masses differ in length");
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (static_cast<int>(points[i].size()) != dim)
        throw std::invalid_argument("point " + std::to_string(i) + " has wrong dimension");
      for (double x : points[i])
        if (!std::isfinite(x)) throw std::invalid_argument("non-finite coordinate");
      if (!(masses[i] >= 0.0) || !std::isfinite(masses[i]))
        throw std::invalid_argument("mass " + std::to_string(i) + " is negative or not finite");
      bool merged = false;
      for (std::size_t j = 0; j < points_.size(); ++j) {
        if (distance(points_[j], points[i]) <= merge_tol) {
          masses_[j] += masses[i];
          merged = true;
          break;
        }
      }
      if (!merged) {
        points_.push_back(points[i]);
        masses_.push_back(masses[i]);
      }
    }
    if (total_mass() > 1.0 + mass_tol_) throw std::invalid_argument("total mass exceeds 1");
  }

  int dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  const std::vector<Point>& points() const { return points_; }
  const std::vector<double>& masses() const { return masses_; }
  double mass_tol() const { return mass_tol_; }

  double total_mass() const {
    double s = 0.0;
    for (double m : masses_) s += m;
    return s;
  }
  bool is_probability(double tol = 1e-9) const { return std::abs(total_mass() - 1.0) <= tol; }

  DiscreteMeasure scaled(double theta) const {
    std::vector<double> m = masses_;
    for (double& x : m) x *= theta;
    return DiscreteMeasure(dim_, points_, m, mass_tol_);
  }

 private:
  int dim_ = 1;
  double mass_tol_ = 1e-12;
  std::vector<Point> points_;
  std::vector<double> masses_;
};

inline double total_mass(const DiscreteMeasure& rho) { return rho.total_mass(); }

inline DiscreteMeasure translate(const DiscreteMeasure& rho, const Point& h) {
  if (static_cast<int>(h.size()) != rho.dim()) throw std::invalid_argument("translation has wrong dimension");
  std::vector<Point> pts = rho.points();
  for (auto& p : pts)
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += h[i];
  return DiscreteMeasure(rho.dim(), pts, rho.masses(), rho.mass_tol());
}

enum class CostKind { table, coulomb, riesz, truncated, exponential, hard_sphere, custom_sampled };
enum class Tri { yes, no, unknown };

inline const char* to_string(Tri t) { return t == Tri::yes ? "yes" : t == Tri::no ? "no" : "unknown"; }

struct Hypotheses {
  bool h1_positive = false;     // l >= 0, l(0) > 0
  bool h2_lsc_monotone = false; // known nonincreasing (implies lsc for our kinds)
  bool h3_vanishing = false;    // l -> 0 at infinity
  bool h4_integrable = false;   // locally integrable
  Tri h5_positive_type = Tri::unknown;
};

class CostSpec {
 public:
  // Step function: l(r) = values[i] on [radii[i], radii[i+1]); beyond cutoff l = 0.
  static CostSpec table(std::vector<double> radii, std::vector<double> values, double cutoff = kInf) {
    if (radii.empty() || radii.size() != values.size()) throw std::invalid_argument("table cost needs matching radii/values");
    if (radii[0] != 0.0) throw std::invalid_argument("table cost must start at r = 0");
    for (std::size_t i = 1; i < radii.size(); ++i)
      if (!(radii[i] > radii[i - 1])) throw std::invalid_argument("table radii must increase");
    for (double v : values)
      if (!(v >= 0.0)) throw std::invalid_argument("table cost values must be >= 0");
    CostSpec c(CostKind::table);
    c.radii_ = std::move(radii);
    c.values_ = std::move(values);
    c.param_ = cutoff;
    return c;
  }
  static CostSpec constant(double value) { return table({0.0}, {value}); }
  static CostSpec coulomb() { return riesz_impl(CostKind::coulomb, 1.0); }
  static CostSpec riesz(double p) {
    if (!(p > 0.0)) throw std::invalid_argument("riesz exponent must be positive");
    return riesz_impl(CostKind::riesz, p);
  }
  static CostSpec truncated(const CostSpec& base, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("truncation level must be positive and finite");
    CostSpec c(CostKind::truncated);
    c.base_ = std::make_shared<const CostSpec>(base);
    c.param_ = h;
    return c;
  }
  static CostSpec exponential(double a) {
    if (!(a > 0.0)) throw std::invalid_argument("exponential rate must be positive");
    CostSpec c(CostKind::exponential);
    c.param_ = a;
    return c;
  }
  static CostSpec hard_sphere() { return CostSpec(CostKind::hard_sphere); }
  // Linear interpolation of samples on [0, R] with R = radii.back(); zero beyond R.
  // tail_bound declares sup of the modelled cost beyond R (NaN = undeclared).
  static CostSpec custom_sampled(std::vector<double> radii, std::vector<double> values,
                                 double tail_bound = std::numeric_limits<double>::quiet_NaN()) {
    if (radii.size() < 2 || radii.size() != values.size()) throw std::invalid_argument("custom cost needs >= 2 samples");
    if (radii[0] != 0.0) throw std::invalid_argument("custom cost must start at r = 0");
    for (std::size_t i = 1; i < radii.size(); ++i)
      if (!(radii[i] > radii[i - 1])) throw std::invalid_argument("custom radii must increase");
    for (double v : values)
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("custom cost values must be finite and >= 0");
    CostSpec c(CostKind::custom_sampled);
    c.radii_ = std::move(radii);
    c.values_ = std::move(values);
    c.param_ = tail_bound;
    return c;
  }

  CostKind kind() const { return kind_; }
  double param() const { return param_; }
  const CostSpec* base() const { return base_.get(); }
  const std::vector<double>& radii() const { return radii_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(double r) const { return eval(r); }

  double eval(double r) const {
    if (r < 0.0 || std::isnan(r)) throw std::domain_error("cost evaluated at negative distance");
    switch (kind_) {
      case CostKind::table: {
        if (r > param_) return 0.0;
        auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
        return values_[static_cast<std::size_t>(it - radii_.begin()) - 1];
      }
      case CostKind::coulomb:
      case CostKind::riesz:
        if (r == 0.0) return kInf;
        return kind_ == CostKind::coulomb ? 1.0 / r : std::pow(r, -param_);
      case CostKind::truncated:
        return std::min(base_->eval(r), param_);
      case CostKind::exponential:
        return std::exp(-param_ * r);
      case CostKind::hard_sphere:
        return r >= 1.0 ? 0.0 : kInf;
      case CostKind::custom_sampled: {
        if (r > radii_.back()) return 0.0;
        auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
        std::size_t i = static_cast<std::size_t>(it - radii_.begin());
        if (i >= radii_.size()) return values_.back();
        double a = radii_[i - 1], b = radii_[i];
        double w = (r - a) / (b - a);
        return values_[i - 1] * (1 - w) + values_[i] * w;
      }
    }
    return kInf;
  }

  double ell_at_zero() const { return eval(0.0); }

  bool bounded() const {
    switch (kind_) {
      case CostKind::coulomb:
      case CostKind::riesz:
      case CostKind::hard_sphere:
        return false;
      default:
        return true;
    }
  }

  // sup of l over [0, inf); finite only for bounded kinds
  double sup_value() const {
    switch (kind_) {
      case CostKind::table:
      case CostKind::custom_sampled: {
        double m = 0.0;
        for (double v : values_) m = std::max(m, v);
        return m;
      }
      case CostKind::truncated:
        return std::min(param_, base_->sup_value());
      case CostKind::exponential:
        return 1.0;
      default:
        return kInf;
    }
  }

  bool monotone_nonincreasing() const {
    switch (kind_) {
      case CostKind::table:
      case CostKind::custom_sampled:
        for (std::size_t i = 1; i < values_.size(); ++i)
          if (values_[i] > values_[i - 1]) return false;
        return true;
      case CostKind::truncated:
        return base_->monotone_nonincreasing();
      default:
        return true;
    }
  }

  // Positive type in the Fourier sense (kernel is psd on every finite point set).
  Tri positive_type(int dim = 3) const {
    switch (kind_) {
      case CostKind::exponential:
        return Tri::yes;
      case CostKind::coulomb:
        return dim >= 2 ? Tri::yes : Tri::unknown;
      case CostKind::riesz:
        return param_ < dim ? Tri::yes : Tri::unknown;
      case CostKind::hard_sphere:
        return Tri::no;
      default:
        return Tri::unknown;
    }
  }

  Hypotheses hypotheses(int dim = 3) const {
    Hypotheses h;
    double l0 = ell_at_zero();
    h.h1_positive = l0 > 0.0;
    h.h2_lsc_monotone = monotone_nonincreasing();
    switch (kind_) {
      case CostKind::table:
        h.h3_vanishing = std::isfinite(param_) || values_.back() == 0.0;
        break;
      case CostKind::truncated:
        h.h3_vanishing = base_->hypotheses(dim).h3_vanishing;
        break;
      default:
        h.h3_vanishing = true;
    }
    if (kind_ == CostKind::hard_sphere)
      h.h4_integrable = false;
    else if (kind_ == CostKind::riesz)
      h.h4_integrable = param_ < dim;
    else if (kind_ == CostKind::coulomb)
      h.h4_integrable = dim > 1;
    else
      h.h4_integrable = true;
    h.h5_positive_type = std::isfinite(l0) ? positive_type(dim) : Tri::no;
    return h;
  }

 private:
  explicit CostSpec(CostKind k) : kind_(k) {}
  static CostSpec riesz_impl(CostKind k, double p) {
    CostSpec c(k);
    c.param_ = p;
    return c;
  }

  CostKind kind_;
  double param_ = 0.0;
  std::vector<double> radii_;
  std::vector<double> values_;
  std::shared_ptr<const CostSpec> base_;
};

inline double eval_cost(const CostSpec& c, double r) { return c.eval(r); }

struct Envelopes {
  double lower;  // inf over t <= r
  double upper;  // sup over t >= r
};

inline Envelopes monotone_envelopes(const CostSpec& c, double r) {
  if (r < 0.0) throw std::domain_error("envelope requested at negative radius");
  double lr = c.eval(r);
  if (c.monotone_nonincreasing()) {
    if (c.kind() == CostKind::custom_sampled && r <= c.radii().back() && std::isfinite(c.param()))
      return {lr, std::max(lr, c.param())};
    return {lr, lr};
  }
  if (c.kind() == CostKind::table || c.kind() == CostKind::custom_sampled) {
    // extrema of piecewise constant / linear functions sit at knots or at r itself
    const auto& rs = c.radii();
    const auto& vs = c.values();
    double lo = lr, hi = lr;
    for (std::size_t i = 0; i < rs.size(); ++i) {
      if (rs[i] <= r) lo = std::min(lo, vs[i]);
      if (rs[i] >= r) hi = std::max(hi, vs[i]);
    }
    if (c.kind() == CostKind::table) {
      if (std::isfinite(c.param()) && r <= c.param()) lo = std::min(lo, lr);
      if (std::isfinite(c.param())) hi = std::max(hi, 0.0);
      return {lo, hi};
    }
    if (std::isnan(c.param()))
      throw std::invalid_argument("non-monotone custom cost needs a declared tail bound to compute the upper envelope");
    if (r <= rs.back()) hi = std::max(hi, c.param());
    else hi = c.param();
    return {lo, hi};
  }
  if (c.kind() == CostKind::truncated) {
    Envelopes b = monotone_envelopes(*c.base(), r);
    return {std::min(b.lower, c.param()), std::min(b.upper, c.param())};
  }
  return {lr, lr};
}

// (d / r^d) int_0^r f(t) t^{d-1} dt
inline double radial_average(const std::function<double(double)>& f, double r, int d) {
  if (!(r > 0.0) || d <= 0) throw std::invalid_argument("radial_average needs r > 0 and d >= 1");
  auto g = [&](double s) { return d * f(r * s) * std::pow(s, d - 1); };
  // divergence probe: contributions of (delta, 1) must settle geometrically as delta -> 0
  auto part = [&](double lo) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, lo, 1.0, 25, 1e-12);
  };
  double i4 = part(1e-4), i8 = part(1e-8), i12 = part(1e-12);
  double d1 = i8 - i4, d2 = i12 - i8;
  double scale = std::max(1.0, std::abs(i12));
  if (!std::isfinite(i12) || (std::abs(d2) > 1e-9 * scale && std::abs(d2) > 0.5 * std::abs(d1)))
    throw std::domain_error("radial average: non-integrable singularity at 0");
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(g, 0.0, 1.0);
}

struct McEstimate {
  double value;
  double std_error;
  std::size_t samples;
};

// Normalised double integral of l(|x-y|) over B_r x B_r in R^d.
inline McEstimate K_constant(const CostSpec& c, double r, int d, std::size_t samples = 1000000,
                             unsigned seed = 12345) {
  if (!c.hypotheses(d).h4_integrable) return {kInf, 0.0, 0};
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud;
  auto sample = [&]() {
    Point p(d);
    double n = 0.0;
    for (auto& x : p) {
      x = nd(gen);
      n += x * x;
    }
    double rad = r * std::pow(ud(gen), 1.0 / d) / std::sqrt(n);
    for (auto& x : p) x *= rad;
    return p;
  };
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    double v = c.eval(distance(sample(), sample()));
    s += v;
    s2 += v * v;
  }
  double mean = s / samples;
  double var = std::max(0.0, s2 / samples - mean * mean);
  return {mean, std::sqrt(var / samples), samples};
}

class GroundGrid {
 public:
  GroundGrid(int dim, std::vector<Point> nodes, bool has_omega = true)
      : dim_(dim), nodes_(std::move(nodes)), has_omega_(has_omega) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (static_cast<int>(nodes_[i].size()) != dim) throw std::invalid_argument("grid node has wrong dimension");
      for (std::size_t j = 0; j < i; ++j)
        if (distance(nodes_[i], nodes_[j]) <= 1e-12) throw std::invalid_argument("grid nodes must be distinct");
    }
  }
  int dim() const { return dim_; }
  const std::vector<Point>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool has_omega() const { return has_omega_; }

 private:
  int dim_;
  std::vector<Point> nodes_;
  bool has_omega_;
};

// Pairwise cost matrix between points (diagonal = l(0)).
inline std::vector<std::vector<double>> cost_matrix(const CostSpec& c, const std::vector<Point>& pts) {
  std::size_t n = pts.size();
  std::vector<std::vector<double>> L(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) L[i][j] = c.eval(i == j ? 0.0 : distance(pts[i], pts[j]));
  return L;
}

}  // namespace rmot::measures
