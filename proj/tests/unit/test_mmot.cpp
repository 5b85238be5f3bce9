#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "rmot/mmot.hpp"

using namespace rmot;
using namespace rmot::mmot;
using measures::CostSpec;
using measures::DiscreteMeasure;

namespace {
CostSpec half_table() { return CostSpec::table({0.0, 1.0}, {1.0, 0.5}); }
DiscreteMeasure two_points(double s, double t) { return DiscreteMeasure(1, {{0.0}, {1.0}}, {s, t}); }
}  // namespace

TEST(CN, Eval) {
  EXPECT_DOUBLE_EQ(c_N_eval(CostSpec::coulomb(), {{0.0}, {2.0}}), 0.5);
  double h = std::sqrt(3.0) / 2;
  EXPECT_NEAR(c_N_eval(CostSpec::coulomb(), {{0.0, 0.0}, {1.0, 0.0}, {0.5, h}}), 1.0, 1e-12);
  EXPECT_EQ(c_N_eval(CostSpec::coulomb(), {{0.0}, {1.0}, {0.0}}), kInf);
}

TEST(QSigma, Build) {
  auto q1 = build_qsigma(CostSpec::constant(1.0), {{0.0}});
  EXPECT_EQ(q1.L, (Mat<double>{{1.0}}));
  auto q2 = build_qsigma(half_table(), {{0.0}, {1.0}});
  EXPECT_EQ(q2.L, (Mat<double>{{1.0, 0.5}, {0.5, 1.0}}));
  EXPECT_TRUE(q2.psd);
  auto q3 = build_qsigma(CostSpec::coulomb(), {{0.0}, {1.0}});
  EXPECT_TRUE(q3.diag_infinite);
}

TEST(Lattice, Enumeration) {
  EXPECT_EQ(enumerate_lattice(2, 2).size(), 6u);
  EXPECT_EQ(enumerate_lattice(3, 8).size(), 165u);
  EXPECT_EQ(enumerate_lattice(4, 5, true).size(), 16u);
  EXPECT_THROW(enumerate_lattice(8, 60), std::invalid_argument);
}

TEST(FSigma, Examples) {
  auto q1 = build_qsigma(CostSpec::constant(1.0), {{0.0}});
  EXPECT_NEAR(f_sigma_N(q1, 2, {1.0}).value, 1.0, 1e-12);
  auto r = f_sigma_N(q1, 2, {1.5});
  EXPECT_NEAR(r.value, 2.5, 1e-12);
  EXPECT_TRUE(r.agree);
  auto q2 = build_qsigma(half_table(), {{0.0}, {1.0}});
  auto r2 = f_sigma_N(q2, 2, {1.0, 1.0});
  EXPECT_NEAR(r2.value, 3.0, 1e-12);
  EXPECT_TRUE(r2.agree);
  EXPECT_EQ(f_sigma_N(q2, 2, {2.0, 1.0}).value, kInf);
}

TEST(FSigma, MatchesSupportingHyperplaneProgram) {
  std::mt19937 gen(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int inst = 0; inst < 30; ++inst) {
    int m = 2 + inst % 2, N = 2 + inst % 5;
    Mat<double> L(m, std::vector<double>(m));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j <= i; ++j) L[i][j] = L[j][i] = (i == j) ? 1.0 + u(gen) : u(gen);
    QuadraticFormQ q{L, false, is_psd(L)};
    std::vector<double> t(m);
    double rem = N;
    for (int i = 0; i < m; ++i) {
      t[i] = u(gen) * rem / m;
      rem -= t[i];
    }
    auto f = f_sigma_N(q, N, t);
    convex::LatticeFunction<double> data;
    for (auto& k : enumerate_lattice(m, N)) {
      std::vector<double> p(k.begin(), k.end());
      data.add(p, q.value(p));
    }
    EXPECT_NEAR(f.value, convex::envelope_eval_dual(data, t), 1e-9);
    EXPECT_TRUE(f.agree);
  }
}

TEST(Relaxed, Examples) {
  // small mass on one atom: no interaction is forced
  auto small = DiscreteMeasure(1, {{0.0}}, {0.2});
  EXPECT_NEAR(relaxed_CN(CostSpec::constant(1.0), small, 5).value, 0.0, 1e-14);
  EXPECT_NEAR(relaxed_CN(half_table(), two_points(0.5, 0.5), 2).value, 0.5, 1e-12);
  EXPECT_NEAR(relaxed_CN(CostSpec::constant(1.0), DiscreteMeasure(1, {{0.0}}, {0.75}), 2).value, 0.5, 1e-12);
  EXPECT_THROW(relaxed_CN(CostSpec::coulomb(), two_points(0.5, 0.5), 2), std::invalid_argument);
}

TEST(Relaxed, NoCollisionMode) {
  auto r = relaxed_CN(CostSpec::coulomb(), two_points(0.5, 0.5), 2, CollisionMode::no_collision);
  EXPECT_NEAR(r.value, 1.0, 1e-12);
}

TEST(Relaxed, StratificationReconstructsMeasure) {
  std::mt19937 gen(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int inst = 0; inst < 20; ++inst) {
    int N = 3 + inst % 4;
    DiscreteMeasure rho(1, {{0.0}, {0.7}, {1.9}}, {0.3 * u(gen), 0.3 * u(gen), 0.3 * u(gen)});
    auto r = relaxed_CN(CostSpec::exponential(1.0), rho, N);
    std::vector<double> rec(3, 0.0);
    double asum = 0.0;
    for (int K = 1; K <= N; ++K) {
      asum += r.strat.a[K];
      if (r.strat.a[K] == 0.0) continue;
      for (int i = 0; i < 3; ++i) rec[i] += double(K) / N * r.strat.a[K] * r.strat.rho[K].masses()[i];
    }
    EXPECT_LE(asum, 1.0 + 1e-12);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(rec[i], rho.masses()[i], 1e-10);
    double theta_N = rho.total_mass() * N;
    EXPECT_LE(r.strat.K_min, theta_N + 1e-9);
    EXPECT_GE(r.strat.K_max, theta_N - 1e-9);
  }
}

TEST(Relaxed, ExactRationalLatticeFormula) {
  using R = Rational;
  for (R L1 : {R(0), R(1, 4), R(1, 2), R(1)}) {
    Mat<R> L{{R(1), L1}, {L1, R(1)}};
    for (int N = 2; N <= 6; ++N)
      for (int k = 0; k <= N; ++k)
        for (int l = 0; k + l <= N; ++l) {
          R v = relaxed_CN_exact(L, {R(k, N), R(l, N)}, N);
          EXPECT_EQ(v, lattice_formula(L, {k, l}, N)) << "N=" << N << " k=" << k << " l=" << l;
        }
  }
}

TEST(ExactCN, Examples) {
  EXPECT_NEAR(exact_CN_probability(half_table(), two_points(0.5, 0.5), 2), 0.5, 1e-12);
  EXPECT_NEAR(exact_CN_probability(CostSpec::constant(1.0), DiscreteMeasure(1, {{0.0}}, {1.0}), 2), 1.0, 1e-12);
  // three collinear unit-spaced atoms: the only 2-plan without collisions pairs each couple with mass 1/3
  DiscreteMeasure tri(1, {{0.0}, {1.0}, {2.0}}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  EXPECT_NEAR(exact_CN_probability(CostSpec::coulomb(), tri, 2), (1.0 + 0.5 + 1.0) / 3.0, 1e-12);
  DiscreteMeasure heavy(1, {{0.0}, {1.0}}, {0.8, 0.2});
  EXPECT_EQ(exact_CN_probability(CostSpec::coulomb(), heavy, 2), kInf);
  // relaxed equals exact for probabilities
  DiscreteMeasure p(1, {{0.0}, {0.5}, {1.5}}, {0.2, 0.5, 0.3});
  for (int N = 2; N <= 7; ++N)
    EXPECT_NEAR(exact_CN_probability(CostSpec::exponential(2.0), p, N),
                relaxed_CN(CostSpec::exponential(2.0), p, N).value, 1e-10);
}

TEST(TwoDirac, Examples) {
  EXPECT_NEAR(two_dirac_closed_form(1.0, 0.5, 0.5, 0.5, 2), 0.5, 1e-15);
  EXPECT_NEAR(two_dirac_closed_form(1.0, 0.5, 0.3, 0.0, 5), 0.05, 1e-15);
  // s + t = K/N: equals the K-marginal cost of the normalised measure, rescaled
  for (int N = 3; N <= 8; ++N)
    for (int K = 2; K <= N; ++K) {
      double s = 0.3 * K / N, t = 0.7 * K / N;
      double ck = exact_CN_probability(half_table(), two_points(0.3, 0.7), K);
      EXPECT_NEAR(two_dirac_closed_form(1.0, 0.5, s, t, N), double(K * (K - 1)) / (N * (N - 1)) * ck, 1e-12);
    }
}

TEST(TwoDirac, MatchesLpOnGridExactly) {
  using R = Rational;
  for (R L1 : {R(0), R(1, 4), R(1, 2), R(1), R(3, 2)}) {
    Mat<R> L{{R(1), L1}, {L1, R(1)}};
    for (int N = 2; N <= 5; ++N)
      for (int i = 0; i <= 20; i += 3)
        for (int j = 0; i + j <= 20; j += 2) {
          R s(i, 20), t(j, 20);
          EXPECT_EQ(relaxed_CN_exact(L, {s, t}, N), two_dirac_closed_form(R(1), L1, s, t, N));
        }
  }
}

TEST(GapScan, TwoDiracPsd) {
  auto rho = two_points(0.4, 0.6);
  std::vector<double> thetas;
  for (int i = 1; i <= 20; ++i) thetas.push_back(i / 20.0);
  auto rows = gap_scan(half_table(), rho, thetas, {2, 3, 5, 8}, 2);
  EXPECT_EQ(rows.size(), 80u);
  for (const auto& r : rows) {
    EXPECT_LE((r.kmax_over_N - r.kmin_over_N) * r.N, 1.0 + 1e-9);
    if (r.theta == 1.0) {
      EXPECT_EQ(r.kmin_over_N, 1.0);
      EXPECT_EQ(r.kmax_over_N, 1.0);
    }
  }
  // theta = K/N on the symmetric two-point measure
  auto sym = two_points(0.5, 0.5);
  for (int N = 2; N <= 8; ++N)
    for (int K = 1; K <= N; ++K) {
      auto r = relaxed_CN(half_table(), sym.scaled(double(K) / N), N);
      EXPECT_EQ(r.strat.K_min, K);
      EXPECT_EQ(r.strat.K_max, K);
    }
}

TEST(Monotonicity, InN) {
  DiscreteMeasure rho(2, {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {0.3, 0.3, 0.2});
  auto rep = monotonicity_check(CostSpec::exponential(1.0), rho, 2, 8);
  EXPECT_TRUE(rep.ok);
  auto tail = monotonicity_check(CostSpec::constant(1.0), DiscreteMeasure(1, {{0.0}}, {0.25}), 2, 8);
  EXPECT_TRUE(tail.ok);
  EXPECT_EQ(tail.values[0], 0.0);  // N = 2..4 carry no interaction
  EXPECT_GT(tail.values.back(), 0.0);
  auto pr = monotonicity_check(half_table(), two_points(0.5, 0.5), 2, 8);
  EXPECT_TRUE(pr.ok);
  EXPECT_GT(pr.values.back(), pr.values.front());
}

TEST(Monotonicity, InMeasure) {
  std::mt19937 gen(9);
  std::uniform_real_distribution<double> u(0, 1);
  for (int inst = 0; inst < 20; ++inst) {
    std::vector<double> nu{0.3 * u(gen), 0.3 * u(gen), 0.3 * u(gen)};
    std::vector<double> rho(3);
    for (int i = 0; i < 3; ++i) rho[i] = nu[i] * u(gen);
    std::vector<measures::Point> pts{{0.0}, {0.6}, {1.7}};
    int N = 2 + inst % 5;
    auto c = CostSpec::exponential(0.5);
    EXPECT_LE(relaxed_CN(c, DiscreteMeasure(1, pts, rho), N).value,
              relaxed_CN(c, DiscreteMeasure(1, pts, nu), N).value + 1e-12);
  }
}

TEST(UpperBound, StratifiedBound) {
  // ||rho|| = K/N: C_N(rho) <= K(K-1)/(N(N-1)) C_K((N/K) rho), equality for two psd atoms
  for (int N = 3; N <= 8; ++N)
    for (int K = 2; K < N; ++K) {
      double th = double(K) / N;
      auto rho = DiscreteMeasure(1, {{0.0}, {1.0}}, {0.35 * th, 0.65 * th});
      double lhs = relaxed_CN(half_table(), rho, N).value;
      double rhs = double(K * (K - 1)) / (N * (N - 1)) * exact_CN_probability(half_table(), two_points(0.35, 0.65), K);
      EXPECT_NEAR(lhs, rhs, 1e-12);
      auto rho3 = DiscreteMeasure(1, {{0.0}, {0.4}, {1.1}}, {0.2 * th, 0.5 * th, 0.3 * th});
      auto p3 = DiscreteMeasure(1, {{0.0}, {0.4}, {1.1}}, {0.2, 0.5, 0.3});
      auto c = CostSpec::exponential(1.0);
      EXPECT_LE(relaxed_CN(c, rho3, N).value,
                double(K * (K - 1)) / (N * (N - 1)) * exact_CN_probability(c, p3, K) + 1e-12);
    }
}
