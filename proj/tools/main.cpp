// rmot: command-line front end for the transport, duality, energy, radial and packing modules.
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rmot/convex.hpp"
#include "rmot/duality.hpp"
#include "rmot/energy.hpp"
#include "rmot/io.hpp"
#include "rmot/mmot.hpp"
#include "rmot/packing.hpp"
#include "rmot/radial.hpp"

using namespace rmot;
using io::json;
using io::num;

namespace {

constexpr int kOk = 0, kUsage = 1, kNumerical = 2;

struct Config {
  std::string measure, cost, potential, grid, out, format, kind, domain, mode = "points", theta;
  std::string N, lambda, eps, kappa, k;
  int dim = 1;
  unsigned seed = 0;
  bool require_certified = false;
  int workers = 0;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string need(const std::string& v, const char* flag) {
  if (v.empty()) throw UsageError(std::string("missing required option ") + flag);
  return v;
}

std::vector<int> int_list(const std::string& s, const char* flag) {
  std::vector<int> out;
  for (double x : io::parse_list(need(s, flag))) {
    if (x != std::floor(x)) throw UsageError(std::string(flag) + " takes integers");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

int single_int(const std::string& s, const char* flag) {
  auto v = int_list(s, flag);
  if (v.size() != 1) throw UsageError(std::string(flag) + " takes a single value here");
  return v[0];
}

double single(const std::string& s, const char* flag) {
  auto v = io::parse_list(need(s, flag));
  if (v.size() != 1) throw UsageError(std::string(flag) + " takes a single value here");
  return v[0];
}

class Runner {
 public:
  explicit Runner(Config c) : c_(std::move(c)) {
    if (c_.workers <= 0) c_.workers = default_workers();
  }

  int mmot();
  int relax();
  int dual();
  int minfty();
  int energy();
  int radial();
  int packing(const std::string& what);
  int sweep();
  int selftest();

 private:
  Config c_;
  bool uncertified_ = false;

  std::string format(const char* dflt) const { return c_.format.empty() ? dflt : c_.format; }

  int emit(const std::string& text) {
    if (c_.out.empty()) {
      std::cout << text;
      std::cout.flush();
    } else {
      std::ofstream f(c_.out, std::ios::binary);
      if (!f) throw io::InputError(c_.out + ": cannot write output");
      f << text;
    }
    if (uncertified_ && c_.require_certified) {
      std::cerr << "rmot: result not certified (--require-certified)\n";
      return kNumerical;
    }
    return kOk;
  }
  int emit(const json& j) { return emit(j.dump(2) + "\n"); }
  int emit(const io::Csv& t, const json& extra = json::object()) {
    if (format("csv") == "json") {
      json j = extra;
      j["rows"] = t.to_json();
      return emit(j);
    }
    return emit(t.str());
  }
  void certified(bool ok) { uncertified_ = uncertified_ || !ok; }

  duality::GridProblem grid_problem() {
    auto g = io::load_grid(need(c_.grid, "--grid"));
    return duality::make_grid_problem(io::load_cost(need(c_.cost, "--cost")), g.grid, g.v);
  }

  packing::Domain domain() {
    auto v = io::parse_list(need(c_.domain, "--domain"));
    if (v.size() == 2) return packing::Domain::interval(v[0], v[1]);
    if (v.size() == 4) return packing::Domain::rect(v[0], v[1], v[2], v[3]);
    throw UsageError("--domain takes a,b (interval) or x0,x1,y0,y1 (rectangle)");
  }

  std::function<double(double)> line_potential() {
    if (c_.potential.empty() || c_.potential == "one") return [](double) { return 1.0; };
    if (c_.potential == "linear") return [](double x) { return x; };
    auto p = radial::load_tabulated(c_.potential);
    return p.V;
  }
};

int Runner::mmot() {
  auto rho = io::load_measure(need(c_.measure, "--measure"));
  auto c = io::load_cost(need(c_.cost, "--cost"));
  int N = single_int(c_.N, "--N");
  double v = mmot::exact_CN_probability(c, rho, N);
  json j{{"object", "C_N(rho), N-marginal symmetric transport cost"}, {"N", N}, {"value", io::jnum(v)}};
  int rc = emit(j);
  return std::isfinite(v) ? rc : kNumerical;
}

int Runner::relax() {
  auto rho = io::load_measure(need(c_.measure, "--measure"));
  auto c = io::load_cost(need(c_.cost, "--cost"));
  int N = single_int(c_.N, "--N");
  auto mode = std::isfinite(c.ell_at_zero()) ? mmot::CollisionMode::standard : mmot::CollisionMode::no_collision;
  auto r = mmot::relaxed_CN(c, rho, N, mode);
  json strat{{"a", r.strat.a}, {"K_min", r.strat.K_min}, {"K_max", r.strat.K_max}};
  json parts = json::array();
  for (int K = 1; K <= N; ++K)
    if (r.strat.a[K] > 0) parts.push_back({{"K", K}, {"a", r.strat.a[K]}, {"rho", io::measure_to_json(r.strat.rho[K])}});
  strat["components"] = parts;
  json j{{"object", "relaxed cost on sub-probabilities"},
         {"N", N},
         {"mass", rho.total_mass()},
         {"value", io::jnum(r.value)},
         {"alternative_optima", r.alternative_optima},
         {"stratification", strat}};
  int rc = emit(j);
  return std::isfinite(r.value) ? rc : kNumerical;
}

int Runner::dual() {
  auto p = grid_problem();
  json rows = json::array();
  for (int N : int_list(c_.N, "--N")) {
    duality::MNOptions opt;
    opt.seed = c_.seed + 1;
    auto r = duality::M_N_grid(p, N, opt);
    certified(r.certified);
    rows.push_back({{"N", N},
                    {"value", r.value},
                    {"occupation", r.occupation},
                    {"method", duality::to_string(r.method)},
                    {"certified", r.certified}});
  }
  return emit(json{{"object", "M_N(v), Fenchel conjugate of the N-marginal cost"}, {"rows", rows}});
}

int Runner::minfty() {
  auto p = grid_problem();
  double t = c_.lambda.empty() ? 1.0 : single(c_.lambda, "--lambda");
  qp::QpOptions opt;
  opt.seed = c_.seed + 1;
  auto r = duality::M_infty_grid(p.scaled(t), opt);
  certified(r.certified);
  std::vector<double> rho(r.measure.data(), r.measure.data() + r.measure.size());
  return emit(json{{"object", "M_infty(t v) = sup <t v, rho> - D2(rho) over grid sub-probabilities"},
                   {"t", t},
                   {"value", r.value},
                   {"measure", rho},
                   {"mass", r.measure.sum()},
                   {"method", duality::to_string(r.method)},
                   {"kkt_residual", r.kkt_residual},
                   {"certified", r.certified}});
}

int Runner::energy() {
  if (!c_.grid.empty()) {
    auto p = grid_problem();
    auto rows = energy::lambda_scan(p, io::parse_list(need(c_.lambda, "--lambda")), c_.workers);
    io::Csv t({"lambda", "mass", "value", "c_lambda", "residual", "certified"});
    for (const auto& r : rows) {
      certified(r.certified);
      t.row({num(r.lambda), num(r.mass), num(r.value), num(r.c_lambda), num(r.residual), r.certified ? "true" : "false"});
    }
    return emit(t);
  }
  auto rho = io::load_measure(need(c_.measure, "--measure"));
  auto c = io::load_cost(need(c_.cost, "--cost"));
  auto e = energy::direct_energy(c, rho);
  json j{{"object", "direct energy D(rho) and its 2-homogeneous extension D2"},
         {"D", io::jnum(e.D)},
         {"D2", io::jnum(e.D2)},
         {"positive_type", measures::to_string(e.psd)}};
  if (!c_.N.empty()) {
    auto ci = energy::C_infty_estimate(c, rho, single_int(c_.N, "--N"), c_.workers);
    json vals = json::array();
    for (std::size_t i = 0; i < ci.Ns.size(); ++i) vals.push_back({{"N", ci.Ns[i]}, {"value", io::jnum(ci.values[i])}});
    j["C_infty"] = {{"values", vals},
                    {"estimate", io::jnum(ci.estimate)},
                    {"extrapolated", io::jnum(ci.extrapolated)},
                    {"agrees_with_D2", ci.agrees},
                    {"prefix_only", ci.prefix_only}};
  }
  return emit(j);
}

int Runner::radial() {
  auto name = need(c_.potential, "--potential");
  auto p = (name.size() == 2 && name[0] == 'v') ? radial::catalog(name) : radial::load_tabulated(name);
  auto k = radial::radial_constants(p);
  std::vector<double> lambdas;
  if (c_.lambda.empty()) {
    double top = k.lambda_V > 0 ? 3.0 * k.lambda_V : 12.0;
    for (int i = 1; i <= 20; ++i) lambdas.push_back(top * i / 20.0);
  } else {
    lambdas = io::parse_list(c_.lambda);
  }
  for (double l : lambdas)
    if (!(l > 0)) throw UsageError("--lambda values must be positive");
  auto rows = radial::mass_curve(p, lambdas, c_.workers);
  io::Csv t({"lambda", "mass", "r_lambda", "c_lambda", "M_infty", "M_infty_closed_form", "rel_err"});
  for (const auto& r : rows)
    t.row({num(r.lambda), num(r.mass), num(r.r_lambda), num(r.c_lambda), num(r.M_infty), num(r.M_closed), num(r.rel_err)});
  json extra{{"potential", p.name},
             {"alpha_V", io::jnum(k.alpha)},
             {"lambda_V", io::jnum(k.lambda_V)},
             {"r_star", io::jnum(k.r_star)},
             {"r_zero", io::jnum(k.r_zero)}};
  return emit(t, extra);
}

int Runner::packing(const std::string& what) {
  if (what == "count") {
    auto om = domain();
    auto mode = c_.mode == "balls" ? packing::Mode::balls : packing::Mode::points;
    if (c_.mode != "balls" && c_.mode != "points") throw UsageError("--mode is points or balls");
    auto epss = io::parse_list(need(c_.eps, "--eps"));
    if (epss.size() == 1) {
      auto r = packing::pack_count({om, epss[0], mode});
      return emit(json{{"object", c_.mode == "points" ? "n_eps: points at mutual distance >= eps"
                                                      : "n~_eps: disjoint balls of diameter eps"},
                       {"eps", epss[0]},
                       {"lower", r.lower},
                       {"upper", r.upper},
                       {"exact", r.exact},
                       {"witness", r.witness}});
    }
    io::Csv t({"eps", "lower", "upper", "exact"});
    for (double e : epss) {
      auto r = packing::pack_count({om, e, mode});
      t.row({num(e), std::to_string(r.lower), std::to_string(r.upper), r.exact ? "true" : "false"});
    }
    return emit(t);
  }
  if (what == "gamma") {
    std::vector<long> ks;
    for (int k : int_list(c_.k, "--k")) ks.push_back(k);
    auto g = packing::gamma_d_estimate(c_.dim, ks, c_.workers);
    io::Csv t({"k", "lower", "upper", "ratio_lower", "ratio_upper", "running_inf"});
    for (const auto& r : g.rows)
      t.row({std::to_string(r.k), std::to_string(r.lower), std::to_string(r.upper), num(r.ratio_lower),
             num(r.ratio_upper), num(r.running_inf)});
    return emit(t, json{{"d", g.d}, {"bracket", {g.bracket_lo, io::jnum(g.bracket_hi)}}, {"note", g.note}});
  }
  if (what == "dual") {
    auto om = domain();
    if (om.dim != 1) throw UsageError("packing dual works on an interval");
    double kappa = single(c_.kappa, "--kappa");
    auto rep = packing::gamma_liminf_check(line_potential(), om.boxes[0].lo[0], om.boxes[0].hi[0], kappa,
                                           int_list(c_.N, "--N"), 0.05, 4, {}, c_.workers);
    io::Csv t({"N", "eps", "value", "bound", "feasible"});
    for (const auto& r : rep.rows)
      t.row({std::to_string(r.N), num(r.eps), num(r.value), num(r.bound), r.feasible ? "true" : "false"});
    return emit(t);
  }
  if (what == "w2") {
    auto om = domain();
    if (om.dim != 1) throw UsageError("packing w2 works on an interval");
    auto rho = io::load_measure1d(need(c_.measure, "--measure"));
    double kappa = single(c_.kappa, "--kappa");
    double a = om.boxes[0].lo[0], b = om.boxes[0].hi[0];
    double dK = packing::w2_to_K(rho, a, b, 1.0 / kappa);
    io::Csv t({"N", "eps", "w2_KN", "w2_K"});
    for (int N : int_list(c_.N, "--N")) {
      auto r = packing::w2_to_KN(rho, a, b, N, kappa / N);
      t.row({std::to_string(N), num(kappa / N), num(r.distance), num(dK)});
    }
    return emit(t);
  }
  throw UsageError("packing needs one of count, gamma, dual, w2");
}

int Runner::sweep() {
  if (c_.kind == "gap") {
    auto rho = io::load_measure(need(c_.measure, "--measure"));
    auto c = io::load_cost(need(c_.cost, "--cost"));
    auto rows = mmot::gap_scan(c, rho, io::parse_list(need(c_.theta, "--theta")), int_list(c_.N, "--N"), c_.workers);
    io::Csv t({"N", "theta", "Kmin_over_N", "Kmax_over_N", "value", "alt_optima"});
    for (const auto& r : rows)
      t.row({std::to_string(r.N), num(r.theta), num(r.kmin_over_N), num(r.kmax_over_N), num(r.value),
             r.alternative_optima ? "true" : "false"});
    return emit(t);
  }
  if (c_.kind == "dual") {
    auto p = grid_problem();
    io::Csv t({"t_or_N", "value", "method", "certified"});
    qp::QpOptions qo;
    qo.seed = c_.seed + 1;
    auto inf = duality::M_infty_grid(p, qo);
    certified(inf.certified);
    t.row({"inf", num(inf.value), duality::to_string(inf.method), inf.certified ? "true" : "false"});
    if (!c_.N.empty()) {
      auto Ns = int_list(c_.N, "--N");
      auto rows = parallel_map<duality::DualReport>(Ns.size(), c_.workers, [&](std::size_t i) {
        duality::MNOptions opt;
        opt.seed = c_.seed + 1;
        return duality::M_N_grid(p, Ns[i], opt);
      });
      for (std::size_t i = 0; i < Ns.size(); ++i) {
        certified(rows[i].certified);
        t.row({std::to_string(Ns[i]), num(rows[i].value), duality::to_string(rows[i].method),
               rows[i].certified ? "true" : "false"});
      }
    }
    if (!c_.lambda.empty()) {
      auto ts = io::parse_list(c_.lambda);
      auto rows = parallel_map<duality::DualReport>(ts.size(), c_.workers,
                                                    [&](std::size_t i) { return duality::M_infty_grid(p.scaled(ts[i]), qo); });
      for (std::size_t i = 0; i < ts.size(); ++i) {
        certified(rows[i].certified);
        t.row({"t=" + num(ts[i]), num(rows[i].value), duality::to_string(rows[i].method),
               rows[i].certified ? "true" : "false"});
      }
    }
    return emit(t);
  }
  if (c_.kind == "lambda") {
    auto p = grid_problem();
    auto rows = energy::lambda_scan(p, io::parse_list(need(c_.lambda, "--lambda")), c_.workers);
    io::Csv t({"lambda", "mass", "value", "c_lambda", "residual", "certified"});
    for (const auto& r : rows) {
      certified(r.certified);
      t.row({num(r.lambda), num(r.mass), num(r.value), num(r.c_lambda), num(r.residual), r.certified ? "true" : "false"});
    }
    return emit(t);
  }
  throw UsageError("sweep needs --kind gap, dual or lambda");
}

// Small invariant suites; output depends only on the seed.
int Runner::selftest() {
  std::mt19937 gen(c_.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  io::Csv t({"check", "ok", "max_error"});
  bool all = true;
  auto record = [&](const char* name, bool ok, double err) {
    all = all && ok;
    t.row({name, ok ? "PASS" : "FAIL", num(err)});
  };

  {  // two-atom closed form against the exact rational program
    using R = mmot::Rational;
    bool ok = true;
    for (R L1 : {R(0), R(1, 2)})
      for (int N = 2; N <= 4; ++N)
        for (int i = 0; i <= 10; i += 2)
          for (int j = 0; i + j <= 10; j += 3) {
            mmot::Mat<R> L{{R(1), L1}, {L1, R(1)}};
            ok = ok && mmot::relaxed_CN_exact(L, {R(i, 10), R(j, 10)}, N) ==
                           mmot::two_dirac_closed_form(R(1), L1, R(i, 10), R(j, 10), N);
          }
    record("two_dirac_exact", ok, 0.0);
  }
  {  // f_sigma LP against the lower convex envelope
    double err = 0.0;
    auto c = measures::CostSpec::exponential(1.0);
    for (int inst = 0; inst < 20; ++inst) {
      int m = 1 + inst % 3, N = 2 + inst % 4;
      std::vector<measures::Point> pts;
      for (int i = 0; i < m; ++i) pts.push_back({2.0 * u(gen), 2.0 * u(gen)});
      auto q = mmot::build_qsigma(c, pts);
      std::vector<double> tt(m);
      double rem = N;
      for (int i = 0; i < m; ++i) rem -= (tt[i] = u(gen) * rem / m);
      auto f = mmot::f_sigma_N(q, N, tt);
      err = std::max(err, std::abs(f.value - f.value_envelope));
    }
    record("f_sigma_envelope", err <= 1e-9, err);
  }
  {  // relaxed cost nondecreasing in N
    measures::DiscreteMeasure rho(1, {{0.0}, {0.7}, {1.9}}, {0.2 + 0.1 * u(gen), 0.3 * u(gen), 0.2});
    auto rep = mmot::monotonicity_check(measures::CostSpec::exponential(0.8), rho, 2, 8);
    double worst = 0.0;
    for (std::size_t i = 1; i < rep.values.size(); ++i) worst = std::max(worst, rep.values[i - 1] - rep.values[i]);
    record("relaxed_monotone_in_N", rep.ok, std::max(0.0, worst));
  }
  std::vector<measures::Point> nodes{{0.0}, {1.0}, {2.0}};
  auto table = measures::CostSpec::table({0.0, 1.0, 1.5}, {1.0, 0.6, 0.2});
  {  // sandwich M_infty <= M_N <= M_infty + (sup l + sup v+)/N
    auto p = duality::make_grid_problem(table, measures::GroundGrid(1, nodes), {u(gen), u(gen) - 0.2, u(gen)});
    auto rep = duality::sandwich_suite(p, {2, 3, 4, 5, 6});
    record("sandwich", rep.ok && rep.certified, 0.0);
  }
  {  // M_N is 1-Lipschitz in sup norm
    auto p = duality::make_grid_problem(table, measures::GroundGrid(1, nodes), {0.0, 0.0, 0.0});
    bool ok = true;
    for (int i = 0; i < 20; ++i) {
      Eigen::Vector3d v1(u(gen), u(gen), u(gen)), v2(u(gen), u(gen), u(gen));
      ok = ok && duality::lipschitz_check(p.with_v(v1), v2, 2 + i % 4).ok;
    }
    record("lipschitz", ok, 0.0);
  }
  {  // radial closed forms
    double err = 0.0;
    for (const char* n : {"v1", "v2"}) {
      auto p = radial::catalog(n);
      for (double l : {0.5, 1.5, 4.0, 9.0}) {
        auto s = radial::solve_radial(p, l);
        err = std::max(err, std::abs(s.M_infty - p.closed_form(l)) / std::abs(p.closed_form(l)));
      }
    }
    record("radial_closed_forms", err <= 1e-6, err);
  }
  {  // weighted packing DP against subset enumeration
    double err = 0.0;
    bool ok = true;
    for (int inst = 0; inst < 10; ++inst) {
      int n = 8 + inst;
      std::vector<double> xs, vs;
      for (int i = 0; i < n; ++i) {
        xs.push_back(u(gen));
        vs.push_back(u(gen));
      }
      int N = 1 + inst % 4;
      double eps = 0.1 + 0.1 * u(gen);
      auto w = packing::weighted_pack_1d(xs, vs, eps, N);
      double best = -kInf;
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != N) continue;
        std::vector<double> sel;
        double s = 0.0;
        for (int i = 0; i < n; ++i)
          if (mask >> i & 1u) {
            sel.push_back(xs[i]);
            s += vs[i];
          }
        std::sort(sel.begin(), sel.end());
        bool sep = true;
        for (std::size_t i = 1; i < sel.size(); ++i) sep = sep && sel[i] - sel[i - 1] >= eps - 1e-12;
        if (sep) best = std::max(best, s / N);
      }
      if (best == -kInf) ok = ok && !w.feasible;
      else err = std::max(err, std::abs(w.value - best));
    }
    record("weighted_pack_dp", ok && err <= 1e-12, err);
  }
  {  // packing counts and W2 oracle
    auto a = packing::pack_count_1d({packing::Domain::interval(0, 1), 0.3, packing::Mode::points});
    auto b = packing::pack_count_1d({packing::Domain::interval(0, 1), 0.3, packing::Mode::balls});
    record("packing_counts", a.lower == 4 && b.lower == 3, 0.0);
    double w = packing::w2_distance_1d(packing::Measure1D::uniform(0, 1), packing::Measure1D::atoms({0.5}, {1.0}));
    double err = std::abs(w - 1.0 / std::sqrt(12.0));
    record("w2_uniform_vs_dirac", err <= 1e-12, err);
  }
  int rc = emit(t);
  return all ? rc : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rmot: multi-marginal transport with loss of mass, dual potentials, radial equilibria and packing"};
  app.require_subcommand(1);
  app.fallthrough();
  Config c;
  app.add_option("--measure", c.measure, "measure JSON {dim, points, masses} (1-D pieces JSON for packing w2)")
      ->envname("RMOT_MEASURE");
  app.add_option("--cost", c.cost, "cost: coulomb, riesz:p, exp:a, const:c, hard_sphere, NAME@h (truncated) or a JSON file")
      ->envname("RMOT_COST");
  app.add_option("--potential", c.potential, "radial potential v1..v4 or a two-column file; packing dual: one, linear or file")
      ->envname("RMOT_POTENTIAL");
  app.add_option("--grid", c.grid, "grid JSON {dim, nodes, v}")->envname("RMOT_GRID");
  app.add_option("--N", c.N, "number of marginals; list a,b,c or range lo:hi:n where accepted")->envname("RMOT_N");
  app.add_option("--lambda", c.lambda, "potential strength (list or range)")->envname("RMOT_LAMBDA");
  app.add_option("--eps", c.eps, "packing separation (list or range)")->envname("RMOT_EPS");
  app.add_option("--kappa", c.kappa, "hard-sphere scaling eps_N = kappa / N")->envname("RMOT_KAPPA");
  app.add_option("--theta", c.theta, "mass fractions for sweep --kind gap")->envname("RMOT_THETA");
  app.add_option("--k", c.k, "cube sides for packing gamma")->envname("RMOT_K");
  app.add_option("--dim", c.dim, "dimension for packing gamma (1 or 2)")->envname("RMOT_DIM");
  app.add_option("--domain", c.domain, "packing domain a,b or x0,x1,y0,y1")->envname("RMOT_DOMAIN");
  app.add_option("--mode", c.mode, "packing count mode: points or balls")->envname("RMOT_MODE");
  app.add_option("--kind", c.kind, "sweep kind: gap, dual or lambda")->envname("RMOT_KIND");
  app.add_option("--seed", c.seed, "seed for randomised searches (default 0)")->envname("RMOT_SEED");
  app.add_option("--out", c.out, "output file (default stdout)")->envname("RMOT_OUT");
  app.add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->envname("RMOT_FORMAT");
  app.add_flag("--require-certified", c.require_certified, "exit 2 when any result is uncertified")
      ->envname("RMOT_REQUIRE_CERTIFIED");
  app.add_option("--workers", c.workers, "worker threads (default: available parallelism)")->envname("RMOT_WORKERS");

  std::string pack_what;
  auto* s_mmot = app.add_subcommand("mmot", "C_N(rho): exact N-marginal symmetric transport cost of a discrete probability");
  auto* s_relax = app.add_subcommand(
      "relax", "relaxed cost of a discrete sub-probability via the compactified LP, with its stratification by particle count");
  auto* s_dual = app.add_subcommand("dual", "M_N(v): best excess of averaged potential over interaction across N-point grid configurations");
  auto* s_minf = app.add_subcommand("minfty", "M_infty(t v): sup of <t v, rho> - D2(rho) over grid sub-probabilities (capped-simplex QP)");
  auto* s_energy = app.add_subcommand(
      "energy", "D(rho), D2(rho) and the C_infty estimate for a measure; with --grid, the mass curve of argmin D2 - lambda <v, .>");
  auto* s_radial = app.add_subcommand(
      "radial", "radial Coulomb equilibria in R^3: mass, radius, multiplier and M_infty(lambda v) with the closed form when known");
  auto* s_pack = app.add_subcommand(
      "packing", "count: n_eps / n~_eps; gamma: packing constant ratios; dual: hard-sphere F_N^* against (gamma_1/kappa) int v; w2: W2 to K_N and K");
  s_pack->add_option("what", pack_what, "count, gamma, dual or w2")->required();
  auto* s_sweep = app.add_subcommand("sweep", "plot-ready CSV sweeps: gap (stratification gaps), dual (M_N and M_infty), lambda (mass curve)");
  auto* s_self = app.add_subcommand("selftest", "deterministic invariant suites; exit 0 when all pass");
  for (auto* s : {s_mmot, s_relax, s_dual, s_minf, s_energy, s_radial, s_pack, s_sweep, s_self}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    Runner r(c);
    if (*s_mmot) return r.mmot();
    if (*s_relax) return r.relax();
    if (*s_dual) return r.dual();
    if (*s_minf) return r.minfty();
    if (*s_energy) return r.energy();
    if (*s_radial) return r.radial();
    if (*s_pack) return r.packing(pack_what);
    if (*s_sweep) return r.sweep();
    if (*s_self) return r.selftest();
  } catch (const io::InputError& e) {
    std::cerr << "rmot: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "rmot: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "rmot: numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "rmot: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "rmot: numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
