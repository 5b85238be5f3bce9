#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rmot/common.hpp"

// Hard-sphere machinery: packing counts, packing constants, weighted packings, congestion, W2 diagnostics.
namespace rmot::packing {

using Point = std::vector<double>;

inline constexpr double kGamma2Lattice = 1.1547005383792515;  // 2/sqrt(3), hexagonal lattice

struct Box {
  Point lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
  }
  bool contains(const Point& p, double tol = 0.0) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (p[i] < lo[i] - tol || p[i] > hi[i] + tol) return false;
    return true;
  }
  Box shrunk(double r) const {
    Box b = *this;
    for (std::size_t i = 0; i < lo.size(); ++i) {
      b.lo[i] += r;
      b.hi[i] -= r;
    }
    return b;
  }
  bool empty() const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (hi[i] < lo[i]) return true;
    return false;
  }
};

// Finite union of axis-aligned boxes with disjoint interiors.
struct Domain {
  int dim = 1;
  std::vector<Box> boxes;

  static Domain interval(double a, double b) { return {1, {Box{{a}, {b}}}}; }
  static Domain rect(double x0, double x1, double y0, double y1) { return {2, {Box{{x0, y0}, {x1, y1}}}}; }

  double volume() const {
    double v = 0.0;
    for (const auto& b : boxes) v += b.volume();
    return v;
  }
  bool contains(const Point& p, double tol = 0.0) const {
    for (const auto& b : boxes)
      if (b.contains(p, tol)) return true;
    return false;
  }
  Box bounding_box() const {
    Box bb = boxes.at(0);
    for (const auto& b : boxes)
      for (int i = 0; i < dim; ++i) {
        bb.lo[i] = std::min(bb.lo[i], b.lo[i]);
        bb.hi[i] = std::max(bb.hi[i], b.hi[i]);
      }
    return bb;
  }
  void validate() const {
    if (dim != 1 && dim != 2) throw std::invalid_argument("packing domains must have dimension 1 or 2");
    if (boxes.empty()) throw std::invalid_argument("empty domain");
    for (const auto& b : boxes) {
      if (b.dim() != dim || static_cast<int>(b.hi.size()) != dim) throw std::invalid_argument("box has wrong dimension");
      for (int i = 0; i < dim; ++i)
        if (!(b.hi[i] >= b.lo[i]) || !std::isfinite(b.lo[i]) || !std::isfinite(b.hi[i]))
          throw std::invalid_argument("box bounds must be finite and ordered");
    }
  }
};

// points: points of the closure at mutual distance >= eps (n_eps)
// balls: disjoint balls of diameter eps inside the domain (n~_eps)
enum class Mode { points, balls };

struct PackingInstance {
  Domain omega;
  double eps = 1.0;
  Mode mode = Mode::points;
};

struct PackResult {
  long lower = 0;
  long upper = 0;  // equal to lower when exact
  bool exact = false;
  std::vector<Point> witness;
};

inline double tol_for(double scale) { return 1e-12 * std::max(1.0, std::abs(scale)); }

// merged 1-D intervals, sorted
inline std::vector<std::pair<double, double>> merged_intervals(const Domain& d) {
  std::vector<std::pair<double, double>> iv;
  for (const auto& b : d.boxes) iv.push_back({b.lo[0], b.hi[0]});
  std::sort(iv.begin(), iv.end());
  std::vector<std::pair<double, double>> out;
  for (const auto& x : iv) {
    if (!out.empty() && x.first <= out.back().second) out.back().second = std::max(out.back().second, x.second);
    else out.push_back(x);
  }
  return out;
}

// greedy sweep is optimal in 1-D: always take the leftmost admissible point
inline PackResult pack_count_1d(const PackingInstance& inst, bool with_witness = true) {
  inst.omega.validate();
  if (inst.omega.dim != 1) throw std::invalid_argument("pack_count_1d needs a 1-D domain");
  if (!(inst.eps > 0)) throw std::invalid_argument("eps must be positive");
  const double eps = inst.eps;
  PackResult r;
  r.exact = true;
  double last = -kInf;
  for (auto [a, b] : merged_intervals(inst.omega)) {
    if (inst.mode == Mode::balls) {
      a += 0.5 * eps;
      b -= 0.5 * eps;
    }
    double tol = tol_for(b);
    if (b < a - tol) continue;
    double start = std::max(a, last + eps);
    if (start > b + tol) continue;
    long k = static_cast<long>(std::floor((b - start) / eps + 1e-12)) + 1;
    r.lower += k;
    if (with_witness)
      for (long i = 0; i < k; ++i) r.witness.push_back({start + i * eps});
    last = start + (k - 1) * eps;
  }
  r.upper = r.lower;
  return r;
}

namespace detail {

// grid hash for minimum-distance queries
class Spatial {
 public:
  explicit Spatial(double eps) : eps_(eps) {}
  bool admissible(const Point& p, double tol) const {
    long cx = cell(p[0]), cy = cell(p[1]);
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy) {
        auto it = map_.find(key(cx + dx, cy + dy));
        if (it == map_.end()) continue;
        for (const auto& q : it->second)
          if (std::hypot(p[0] - q[0], p[1] - q[1]) < eps_ - tol) return false;
      }
    return true;
  }
  void add(const Point& p) { map_[key(cell(p[0]), cell(p[1]))].push_back(p); }

 private:
  long cell(double x) const { return static_cast<long>(std::floor(x / eps_)); }
  static long long key(long x, long y) { return (static_cast<long long>(x) << 32) ^ (static_cast<long long>(y) & 0xffffffffLL); }
  double eps_;
  std::unordered_map<long long, std::vector<Point>> map_;
};

}  // namespace detail

// upper bound on points at mutual distance >= eps in a closed box (area and Oler bounds)
inline long box_upper_bound(const Box& b, double eps) {
  double W = b.hi[0] - b.lo[0], H = b.hi[1] - b.lo[1];
  double disc = M_PI * eps * eps / 4.0;
  double area = (W * H + eps * (W + H) + disc) / disc;
  double oler = 2.0 / std::sqrt(3.0) * W * H / (eps * eps) + (W + H) / eps + 1.0;
  return static_cast<long>(std::floor(std::min(area, oler) + 1e-9));
}

inline PackResult pack_count_2d(const PackingInstance& inst, bool augment = true) {
  inst.omega.validate();
  if (inst.omega.dim != 2) throw std::invalid_argument("pack_count_2d needs a 2-D domain");
  if (!(inst.eps > 0)) throw std::invalid_argument("eps must be positive");
  const double eps = inst.eps;
  // centre regions
  std::vector<Box> regions;
  for (const auto& b : inst.omega.boxes) {
    Box r = inst.mode == Mode::balls ? b.shrunk(0.5 * eps) : b;
    if (!r.empty()) regions.push_back(r);
  }
  PackResult best;
  if (regions.empty()) {
    best.upper = 0;
    for (const auto& b : inst.omega.boxes) best.upper += box_upper_bound(b, eps);
    return best;
  }
  Box bb = regions[0];
  for (const auto& r : regions)
    for (int i = 0; i < 2; ++i) {
      bb.lo[i] = std::min(bb.lo[i], r.lo[i]);
      bb.hi[i] = std::max(bb.hi[i], r.hi[i]);
    }
  const double tol = tol_for(std::max(std::abs(bb.hi[0]), std::abs(bb.hi[1])));
  auto inside = [&](const Point& p) {
    for (const auto& r : regions)
      if (r.contains(p, tol)) return true;
    return false;
  };
  auto try_layout = [&](std::vector<Point> pts) {
    std::vector<Point> ok;
    detail::Spatial sp(eps);
    for (auto& p : pts) {
      if (inside(p) && sp.admissible(p, tol)) {
        sp.add(p);
        ok.push_back(p);
      }
    }
    if (augment) {
      const double step = eps / 4.0;
      for (double x = bb.lo[0]; x <= bb.hi[0] + tol; x += step)
        for (double y = bb.lo[1]; y <= bb.hi[1] + tol; y += step) {
          Point p{std::min(x, bb.hi[0]), std::min(y, bb.hi[1])};
          if (inside(p) && sp.admissible(p, tol)) {
            sp.add(p);
            ok.push_back(p);
          }
        }
    }
    if (static_cast<long>(ok.size()) > best.lower) {
      best.lower = static_cast<long>(ok.size());
      best.witness = ok;
    }
  };
  const double W = bb.hi[0] - bb.lo[0], H = bb.hi[1] - bb.lo[1];
  const double h = eps * std::sqrt(3.0) / 2.0;
  for (int orient = 0; orient < 2; ++orient) {
    double A = orient ? H : W, B = orient ? W : H;
    auto emit = [&](double u, double v) {
      return orient ? Point{bb.lo[0] + v, bb.lo[1] + u} : Point{bb.lo[0] + u, bb.lo[1] + v};
    };
    // triangular lattice, rows along the first axis
    for (int shift = 0; shift < 2; ++shift) {
      std::vector<Point> pts;
      long rows = static_cast<long>(std::floor(B / h + 1e-12));
      for (long j = 0; j <= rows; ++j) {
        double off = ((j + shift) % 2) * 0.5 * eps;
        for (double u = off; u <= A + tol; u += eps) pts.push_back(emit(u, j * h));
      }
      try_layout(pts);
    }
    // square lattice
    {
      std::vector<Point> pts;
      for (double v = 0; v <= B + tol; v += eps)
        for (double u = 0; u <= A + tol; u += eps) pts.push_back(emit(u, v));
      try_layout(pts);
    }
    // zigzag between the two long sides of a thin strip
    if (B < eps) {
      double dx = std::sqrt(eps * eps - B * B);
      std::vector<Point> pts;
      long i = 0;
      for (double u = 0; u <= A + tol; u += dx, ++i) pts.push_back(emit(u, (i % 2) * B));
      try_layout(pts);
    }
  }
  best.upper = 0;
  for (const auto& b : inst.omega.boxes) best.upper += box_upper_bound(b, eps);
  best.upper = std::max(best.upper, best.lower);
  best.exact = best.lower == best.upper;
  return best;
}

inline PackResult pack_count(const PackingInstance& inst) {
  return inst.omega.dim == 1 ? pack_count_1d(inst) : pack_count_2d(inst);
}

inline double min_separation(const std::vector<Point>& pts) {
  double m = kInf;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < pts[i].size(); ++k) s += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
      m = std::min(m, std::sqrt(s));
    }
  return m;
}

struct GammaRow {
  long k;
  long lower, upper;
  double ratio_lower, ratio_upper;
  double running_inf;  // inf over k so far of the ratio (upper bound for gamma_d)
};

struct GammaEstimate {
  int d = 1;
  std::vector<GammaRow> rows;
  double estimate = 0.0;   // inf of ratios seen
  double bracket_lo = 0.0;
  double bracket_hi = kInf;
  std::string note;
};

// S(Q_k)/k^d for the cube of side k and unit separation
inline GammaEstimate gamma_d_estimate(int d, const std::vector<long>& ks, int workers = 1) {
  if (d != 1 && d != 2) throw std::invalid_argument("gamma_d_estimate supports d = 1, 2");
  GammaEstimate g;
  g.d = d;
  auto rows = parallel_map<GammaRow>(ks.size(), workers, [&](std::size_t i) {
    long k = ks[i];
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    PackingInstance inst;
    inst.eps = 1.0;
    if (d == 1) {
      inst.omega = Domain::interval(0.0, double(k));
      auto r = pack_count_1d(inst, false);
      return GammaRow{k, r.lower, r.upper, double(r.lower) / k, double(r.upper) / k, 0.0};
    }
    inst.omega = Domain::rect(0.0, double(k), 0.0, double(k));
    auto r = pack_count_2d(inst, k <= 30);
    double k2 = double(k) * k;
    return GammaRow{k, r.lower, r.upper, r.lower / k2, r.upper / k2, 0.0};
  });
  double inf_lo = kInf, inf_hi = kInf;
  for (auto& r : rows) {
    inf_lo = std::min(inf_lo, r.ratio_lower);
    inf_hi = std::min(inf_hi, r.ratio_upper);
    r.running_inf = d == 1 ? inf_lo : inf_hi;
  }
  g.rows = rows;
  if (d == 1) {
    g.estimate = inf_lo;
    g.bracket_lo = 1.0;  // (k+1)/k > 1 for every k
    g.bracket_hi = inf_lo;
    g.note = "exact counts: S(Q_k) = k + 1";
  } else {
    g.estimate = kGamma2Lattice;
    g.bracket_lo = kGamma2Lattice;
    g.bracket_hi = inf_hi;
    g.note = "bracket only: lower end is the hexagonal-lattice value, upper end the best certified area bound";
  }
  return g;
}

struct WeightedPack {
  bool feasible = false;
  double value = -kInf;  // (1/N) sum v(x_i)
  std::vector<double> positions;
};

// max of (1/N) sum v over exactly N candidates with pairwise gaps >= eps
inline WeightedPack weighted_pack_1d(std::vector<double> xs, std::vector<double> vs, double eps, int N) {
  if (xs.size() != vs.size()) throw std::invalid_argument("candidates and values differ in length");
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
  const std::size_t n = xs.size();
  std::vector<std::size_t> ord(n);
  std::iota(ord.begin(), ord.end(), 0);
  std::stable_sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> x(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = xs[ord[i]];
    v[i] = vs[ord[i]];
  }
  // P[i] = number of candidates at distance >= eps to the left of i
  std::vector<std::size_t> P(n);
  for (std::size_t i = 0; i < n; ++i) {
    double lim = x[i] - eps + tol_for(x[i]);
    P[i] = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), lim) - x.begin());
    P[i] = std::min(P[i], i);
  }
  const double NEG = -kInf;
  std::vector<std::vector<double>> dp(n + 1, std::vector<double>(N + 1, NEG));
  std::vector<std::vector<char>> take(n + 1, std::vector<char>(N + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) dp[i][0] = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 1; c <= N; ++c) {
      dp[i + 1][c] = dp[i][c];
      double alt = dp[P[i]][c - 1];
      if (alt > NEG && v[i] + alt > dp[i + 1][c]) {
        dp[i + 1][c] = v[i] + alt;
        take[i + 1][c] = 1;
      }
    }
  WeightedPack r;
  if (dp[n][N] == NEG) return r;
  r.feasible = true;
  r.value = dp[n][N] / N;
  std::size_t i = n;
  int c = N;
  while (c > 0) {
    if (take[i][c]) {
      r.positions.push_back(x[i - 1]);
      i = P[i - 1];
      --c;
    } else {
      --i;
    }
  }
  std::reverse(r.positions.begin(), r.positions.end());
  return r;
}

// candidates: uniform grid of the given step on each interval plus the supplied breakpoints
inline std::vector<double> candidate_grid(const Domain& omega, double step, const std::vector<double>& breakpoints = {}) {
  std::vector<double> c;
  for (auto [a, b] : merged_intervals(omega)) {
    long n = static_cast<long>(std::ceil((b - a) / step - 1e-9));
    for (long i = 0; i <= n; ++i) c.push_back(std::min(b, a + i * step));
    for (double p : breakpoints)
      if (p >= a && p <= b) c.push_back(p);
  }
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

struct CongestionReport {
  bool member = false;
  double theta = 0.0;
  double bound = 0.0;        // 1/(theta |Omega|)
  double max_density = 0.0;
  int worst_piece = -1;
  bool atomic = false;
  std::string reason;
};

// density given piecewise constant on boxes: (box, mass); atoms are boxes of zero volume
inline CongestionReport congestion_membership(const std::vector<std::pair<Box, double>>& rho, double kappa,
                                              const Domain& omega, double gamma_d, double tol = 1e-9) {
  omega.validate();
  CongestionReport r;
  r.theta = kappa / (gamma_d * omega.volume());
  if (!(r.theta > 0) || r.theta >= 1.0) throw std::invalid_argument("congestion ratio theta must lie in (0, 1)");
  r.bound = 1.0 / (r.theta * omega.volume());
  r.member = true;
  double mass = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const auto& [b, m] = rho[i];
    if (m < 0) throw std::invalid_argument("negative mass");
    if (m == 0) continue;
    mass += m;
    double vol = b.volume();
    if (vol <= 0) {
      r.atomic = true;
      r.member = false;
      r.max_density = kInf;
      r.worst_piece = static_cast<int>(i);
      r.reason = "measure has an atom";
      continue;
    }
    double dens = m / vol;
    if (dens > r.max_density) {
      r.max_density = dens;
      if (!r.atomic) r.worst_piece = static_cast<int>(i);
    }
    if (!omega.contains(b.lo, 1e-12) || !omega.contains(b.hi, 1e-12)) {
      r.member = false;
      r.reason = "mass outside the domain";
    }
  }
  if (r.max_density > r.bound * (1 + tol)) {
    r.member = false;
    if (r.reason.empty()) r.reason = "density exceeds 1/(theta |Omega|)";
  }
  if (std::abs(mass - 1.0) > tol) {
    r.member = false;
    if (r.reason.empty()) r.reason = "not a probability";
  }
  return r;
}

struct LiminfRow {
  int N;
  double eps, value, bound;
  bool feasible, ok;
};

struct LiminfReport {
  std::vector<LiminfRow> rows;
  bool ok = true;
  double integral = 0.0;
};

// F_N^*(v) on [a,b] with eps_N = kappa/N against (gamma_1/kappa) int v
inline LiminfReport gamma_liminf_check(const std::function<double(double)>& v, double a, double b, double kappa,
                                       const std::vector<int>& Ns, double tol = 0.05, int refine = 4,
                                       const std::vector<double>& breakpoints = {}, int workers = 1) {
  if (!(kappa > 0) || !(b > a)) throw std::invalid_argument("need kappa > 0 and a < b");
  LiminfReport rep;
  // integral of v by composite Simpson on a fine grid
  const int M = 20000;
  double s = v(a) + v(b);
  for (int i = 1; i < M; ++i) s += (i % 2 ? 4.0 : 2.0) * v(a + (b - a) * i / M);
  rep.integral = s * (b - a) / (3.0 * M);
  const double bound = rep.integral / kappa;  // gamma_1 = 1
  rep.rows = parallel_map<LiminfRow>(Ns.size(), workers, [&](std::size_t i) {
    int N = Ns[i];
    double eps = kappa / N;
    auto xs = candidate_grid(Domain::interval(a, b), eps / refine, breakpoints);
    std::vector<double> vs;
    for (double x : xs) vs.push_back(v(x));
    auto w = weighted_pack_1d(xs, vs, eps, N);
    bool ok = !w.feasible || w.value <= bound + tol;
    return LiminfRow{N, eps, w.value, bound, w.feasible, ok};
  });
  for (const auto& r : rep.rows) rep.ok = rep.ok && r.ok;
  return rep;
}

// 1-D measure made of atoms (a == b) and uniform pieces on [a, b]; pieces must not overlap
struct Measure1D {
  struct Piece {
    double a, b, mass;
  };
  std::vector<Piece> pieces;

  static Measure1D atoms(const std::vector<double>& xs, const std::vector<double>& ms) {
    Measure1D m;
    for (std::size_t i = 0; i < xs.size(); ++i) m.pieces.push_back({xs[i], xs[i], ms[i]});
    m.normalize();
    return m;
  }
  static Measure1D uniform(double a, double b, double mass = 1.0) {
    Measure1D m;
    m.pieces.push_back({a, b, mass});
    return m;
  }
  static Measure1D empirical(const std::vector<double>& xs) {
    return atoms(xs, std::vector<double>(xs.size(), 1.0 / static_cast<double>(xs.size())));
  }
  void normalize() {
    std::sort(pieces.begin(), pieces.end(), [](const Piece& p, const Piece& q) { return p.a < q.a || (p.a == q.a && p.b < q.b); });
    for (std::size_t i = 1; i < pieces.size(); ++i)
      if (pieces[i].a < pieces[i - 1].b - 1e-15) throw std::invalid_argument("measure pieces overlap");
  }
  double mass() const {
    double s = 0.0;
    for (const auto& p : pieces) s += p.mass;
    return s;
  }
  // quantile breakpoints in u and the quantile function (left-continuous inverse CDF)
  std::vector<double> u_breaks() const {
    std::vector<double> u{0.0};
    double c = 0.0, M = mass();
    for (const auto& p : pieces) {
      c += p.mass;
      u.push_back(std::min(1.0, c / M));
    }
    return u;
  }
  double quantile(double u) const {
    double M = mass(), c = 0.0;
    for (const auto& p : pieces) {
      double w = p.mass / M;
      if (u <= c + w || &p == &pieces.back()) {
        double t = w > 0 ? std::clamp((u - c) / w, 0.0, 1.0) : 0.0;
        return p.a + t * (p.b - p.a);
      }
      c += w;
    }
    return pieces.empty() ? 0.0 : pieces.back().b;
  }
};

// exact W2 between two 1-D measures of equal mass via the quantile coupling
inline double w2_distance_1d(Measure1D r, Measure1D m, double tol = 1e-9) {
  r.normalize();
  m.normalize();
  double M = r.mass();
  if (std::abs(M - m.mass()) > tol * std::max(1.0, M)) throw std::invalid_argument("W2 needs equal masses");
  if (r.pieces.empty()) return 0.0;
  auto u = r.u_breaks();
  auto u2 = m.u_breaks();
  u.insert(u.end(), u2.begin(), u2.end());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  // the difference of quantiles is affine on each cell, so Simpson is exact
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    double lo = u[i], hi = u[i + 1];
    if (hi <= lo) continue;
    double e = 1e-14 * (hi - lo);
    double f0 = r.quantile(lo + e) - m.quantile(lo + e);
    double f1 = r.quantile(hi - e) - m.quantile(hi - e);
    double fm = r.quantile(0.5 * (lo + hi)) - m.quantile(0.5 * (lo + hi));
    s += (hi - lo) / 6.0 * (f0 * f0 + 4 * fm * fm + f1 * f1);
  }
  return std::sqrt(std::max(0.0, s * M));
}

namespace detail {

// weighted isotonic (nondecreasing) regression by pool-adjacent-violators
inline std::vector<double> pava(const std::vector<double>& y, const std::vector<double>& w) {
  struct Block {
    double sum, weight;
    std::size_t len;
  };
  std::vector<Block> st;
  for (std::size_t i = 0; i < y.size(); ++i) {
    st.push_back({y[i] * w[i], w[i], 1});
    while (st.size() > 1 && st[st.size() - 2].sum / st[st.size() - 2].weight >= st.back().sum / st.back().weight) {
      auto b = st.back();
      st.pop_back();
      st.back().sum += b.sum;
      st.back().weight += b.weight;
      st.back().len += b.len;
    }
  }
  std::vector<double> out;
  for (const auto& b : st) out.insert(out.end(), b.len, b.sum / b.weight);
  return out;
}

}  // namespace detail

struct ProjectionResult {
  bool feasible = false;
  double distance = kInf;
  std::vector<double> positions;  // K_N: the optimal N points
};

// W2(rho, K_N) on [a, b]: N equal atoms with gaps >= eps; exact isotonic regression
inline ProjectionResult w2_to_KN(const Measure1D& rho, double a, double b, int N, double eps) {
  ProjectionResult r;
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  if (b - a < (N - 1) * eps - tol_for(b)) return r;
  Measure1D rr = rho;
  rr.normalize();
  if (std::abs(rr.mass() - 1.0) > 1e-9) throw std::invalid_argument("W2 to K_N needs a probability");
  // bin means of the quantile function, integrated exactly on breakpoints
  auto ub = rr.u_breaks();
  std::vector<double> mean(N);
  for (int i = 0; i < N; ++i) {
    double lo = double(i) / N, hi = double(i + 1) / N;
    std::vector<double> cuts{lo, hi};
    for (double u : ub)
      if (u > lo && u < hi) cuts.push_back(u);
    std::sort(cuts.begin(), cuts.end());
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      double e = 1e-14 * (cuts[k + 1] - cuts[k]);
      double q0 = rr.quantile(cuts[k] + e), q1 = rr.quantile(cuts[k + 1] - e);
      s += 0.5 * (q0 + q1) * (cuts[k + 1] - cuts[k]);
    }
    mean[i] = s * N;
  }
  std::vector<double> y(N), w(N, 1.0);
  for (int i = 0; i < N; ++i) y[i] = mean[i] - i * eps;
  auto z = detail::pava(y, w);
  double top = b - (N - 1) * eps;
  r.positions.resize(N);
  for (int i = 0; i < N; ++i) r.positions[i] = std::clamp(z[i], a, std::max(a, top)) + i * eps;
  r.feasible = true;
  r.distance = w2_distance_1d(rr, Measure1D::empirical(r.positions));
  return r;
}

// W2(rho, K) with K = probability densities on [a, b] bounded by M; isotonic regression on a u-grid
inline double w2_to_K(const Measure1D& rho, double a, double b, double M, int grid = 20000) {
  if (!(M > 0) || M * (b - a) < 1.0 - 1e-12) throw std::invalid_argument("density bound too small for a probability");
  Measure1D rr = rho;
  rr.normalize();
  std::vector<double> y(grid), w(grid, 1.0);
  for (int i = 0; i < grid; ++i) {
    double u = (i + 0.5) / grid;
    y[i] = rr.quantile(u) - u / M;
  }
  auto z = detail::pava(y, w);
  double s = 0.0;
  for (int i = 0; i < grid; ++i) {
    double u = (i + 0.5) / grid;
    double q = std::clamp(z[i], a, b - 1.0 / M) + u / M;
    double d = rr.quantile(u) - q;
    s += d * d / grid;
  }
  return std::sqrt(s);
}

// W1 between the empirical measure of xs and the uniform law on [a, b]
inline double w1_to_uniform_1d(std::vector<double> xs, double a, double b) {
  if (xs.empty()) throw std::invalid_argument("empty configuration");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  std::vector<double> pts{a};
  for (double x : xs) pts.push_back(std::clamp(x, a, b));
  pts.push_back(b);
  // integrate |F_emp - F_unif| piecewise; F_emp constant between consecutive points
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double lo = pts[i], hi = pts[i + 1];
    if (hi <= lo) continue;
    double Fe = static_cast<double>(std::upper_bound(xs.begin(), xs.end(), lo) - xs.begin()) / n;
    double d0 = Fe - (lo - a) / (b - a), d1 = Fe - (hi - a) / (b - a);
    if (d0 * d1 >= 0) s += 0.5 * (std::abs(d0) + std::abs(d1)) * (hi - lo);
    else s += 0.5 * (d0 * d0 + d1 * d1) / std::abs(d0 - d1) * (hi - lo);
  }
  return s;
}

// sliced W1 between the empirical measure of pts and the uniform law on a rectangle
inline double sliced_w1_to_uniform_2d(const std::vector<Point>& pts, const Box& box, int directions = 64,
                                      int grid = 4000) {
  if (pts.empty()) throw std::invalid_argument("empty configuration");
  const double W = box.hi[0] - box.lo[0], H = box.hi[1] - box.lo[1];
  double total = 0.0;
  for (int k = 0; k < directions; ++k) {
    double th = M_PI * (k + 0.5) / directions;
    double c = std::cos(th), s = std::sin(th);
    // projection of the uniform law: sum of uniforms on [0, |c| W] and [0, |s| H] (trapezoid)
    double A = std::abs(c) * W, B = std::abs(s) * H;
    double base = std::min(c * box.lo[0], c * box.hi[0]) + std::min(s * box.lo[1], s * box.hi[1]);
    auto cdf = [&](double t) {
      t -= base;
      if (t <= 0) return 0.0;
      if (t >= A + B) return 1.0;
      double lo = std::min(A, B), hi = std::max(A, B);
      if (lo <= 0) return t / hi;
      if (t <= lo) return t * t / (2 * lo * hi);
      if (t <= hi) return (t - 0.5 * lo) / hi;
      double r = A + B - t;
      return 1.0 - r * r / (2 * lo * hi);
    };
    std::vector<double> proj;
    for (const auto& p : pts) proj.push_back(c * p[0] + s * p[1]);
    std::sort(proj.begin(), proj.end());
    double lo = std::min(base, proj.front()), hi = std::max(base + A + B, proj.back());
    double acc = 0.0, h = (hi - lo) / grid;
    for (int i = 0; i < grid; ++i) {
      double t = lo + (i + 0.5) * h;
      double Fe = static_cast<double>(std::upper_bound(proj.begin(), proj.end(), t) - proj.begin()) / proj.size();
      acc += std::abs(Fe - cdf(t)) * h;
    }
    total += acc;
  }
  return total / directions;
}

struct UniformityRow {
  double eps;
  long count;
  double distance;
};

// maximal witnesses for decreasing eps and their distance to the uniform law
inline std::vector<UniformityRow> empirical_uniformity(const Domain& omega, const std::vector<double>& epss) {
  omega.validate();
  if (omega.boxes.size() != 1) throw std::invalid_argument("empirical_uniformity needs a single box");
  std::vector<UniformityRow> rows;
  for (double e : epss) {
    PackingInstance inst{omega, e, Mode::points};
    auto r = pack_count(inst);
    double d;
    if (omega.dim == 1) {
      std::vector<double> xs;
      for (const auto& p : r.witness) xs.push_back(p[0]);
      d = w1_to_uniform_1d(xs, omega.boxes[0].lo[0], omega.boxes[0].hi[0]);
    } else {
      d = sliced_w1_to_uniform_2d(r.witness, omega.boxes[0]);
    }
    rows.push_back({e, r.lower, d});
  }
  return rows;
}

}  // namespace rmot::packing
