#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "rmot/measures.hpp"

using namespace rmot;
using namespace rmot::measures;

TEST(Measures, TotalMass) {
  EXPECT_DOUBLE_EQ(DiscreteMeasure(1, {{0.0}, {1.0}}, {0.3, 0.2}).total_mass(), 0.5);
  EXPECT_EQ(DiscreteMeasure(1, {}, {}).total_mass(), 0.0);
  EXPECT_EQ(DiscreteMeasure(1, {{0.0}}, {1.0}).total_mass(), 1.0);
}

TEST(Measures, RejectsBadInput) {
  EXPECT_THROW(DiscreteMeasure(1, {{0.0}}, {-0.1}), std::invalid_argument);
  EXPECT_THROW(DiscreteMeasure(1, {{0.0}, {1.0}}, {0.7, 0.7}), std::invalid_argument);
  EXPECT_THROW(DiscreteMeasure(2, {{0.0}}, {0.5}), std::invalid_argument);
}

TEST(Measures, MergesCoincidentAtoms) {
  DiscreteMeasure r(1, {{0.0}, {1.0}, {0.0}}, {0.2, 0.3, 0.1});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r.masses()[0], 0.3, 1e-15);
}

TEST(Measures, Translate) {
  auto d = translate(DiscreteMeasure(1, {{0.0}}, {1.0}), {1.0});
  EXPECT_EQ(d.points()[0][0], 1.0);
  DiscreteMeasure r(1, {{0.0}, {1.0}}, {0.5, 0.5});
  auto t = translate(r, {2.0});
  EXPECT_EQ(t.points()[0][0], 2.0);
  EXPECT_EQ(t.points()[1][0], 3.0);
  EXPECT_EQ(t.masses(), r.masses());
  auto z = translate(r, {0.0});
  EXPECT_EQ(z.points(), r.points());
  EXPECT_THROW(translate(r, {1.0, 2.0}), std::invalid_argument);
  EXPECT_DOUBLE_EQ(total_mass(translate(r, {-7.5})), total_mass(r));
}

TEST(Measures, EvalCost) {
  EXPECT_DOUBLE_EQ(eval_cost(CostSpec::coulomb(), 2.0), 0.5);
  EXPECT_EQ(eval_cost(CostSpec::hard_sphere(), 0.5), kInf);
  EXPECT_EQ(eval_cost(CostSpec::hard_sphere(), 1.0), 0.0);
  EXPECT_DOUBLE_EQ(eval_cost(CostSpec::truncated(CostSpec::coulomb(), 3.0), 0.1), 3.0);
  EXPECT_THROW(eval_cost(CostSpec::coulomb(), -1.0), std::domain_error);
  auto tab = CostSpec::table({0.0, 1.0}, {1.0, 0.5});
  EXPECT_EQ(tab(0.0), 1.0);
  EXPECT_EQ(tab(0.99), 1.0);
  EXPECT_EQ(tab(1.0), 0.5);
  EXPECT_DOUBLE_EQ(CostSpec::riesz(2.0)(2.0), 0.25);
  EXPECT_DOUBLE_EQ(CostSpec::exponential(1.0)(1.0), std::exp(-1.0));
}

TEST(Measures, TruncationMatchesMin) {
  auto base = CostSpec::riesz(0.5);
  auto tr = CostSpec::truncated(base, 2.0);
  for (int i = 0; i <= 200; ++i) {
    double r = i * 0.01;
    EXPECT_EQ(tr(r), std::min(base(r), 2.0));
  }
}

TEST(Measures, Hypotheses) {
  auto h = CostSpec::coulomb().hypotheses(3);
  EXPECT_TRUE(h.h1_positive);
  EXPECT_TRUE(h.h4_integrable);
  EXPECT_EQ(h.h5_positive_type, Tri::no);  // l(0) infinite
  auto e = CostSpec::exponential(1.0).hypotheses(2);
  EXPECT_EQ(e.h5_positive_type, Tri::yes);
  EXPECT_FALSE(CostSpec::hard_sphere().hypotheses(1).h4_integrable);
  EXPECT_TRUE(CostSpec::exponential(1.0).bounded());
  EXPECT_FALSE(CostSpec::coulomb().bounded());
}

TEST(Measures, EnvelopesMonotone) {
  auto e = monotone_envelopes(CostSpec::coulomb(), 2.0);
  EXPECT_DOUBLE_EQ(e.lower, 0.5);
  EXPECT_DOUBLE_EQ(e.upper, 0.5);
  auto h = monotone_envelopes(CostSpec::hard_sphere(), 2.0);
  EXPECT_EQ(h.lower, 0.0);
  EXPECT_EQ(h.upper, 0.0);
}

TEST(Measures, EnvelopesSampledNonMonotone) {
  auto fn = [](double t) { return std::abs(std::sin(t)) + std::exp(-t); };
  std::vector<double> rs, vs;
  const double R = 20.0;
  const int n = 20000;
  for (int i = 0; i <= n; ++i) {
    rs.push_back(R * i / n);
    vs.push_back(fn(R * i / n));
  }
  auto c = CostSpec::custom_sampled(rs, vs, 1.0 + std::exp(-R));
  // dense brute force on the true function
  double lo = kInf;
  for (int i = 0; i <= 1000000; ++i) lo = std::min(lo, fn(M_PI * i / 1000000));
  auto e = monotone_envelopes(c, M_PI);
  EXPECT_NEAR(e.lower, lo, 2e-3);
  EXPECT_NEAR(lo, std::exp(-M_PI), 1e-9);
  // sandwich on a test grid and monotonicity of both envelopes
  double prev_lo = kInf, prev_hi = kInf;
  for (int i = 0; i <= 400; ++i) {
    double r = i * 0.05;
    auto ev = monotone_envelopes(c, r);
    EXPECT_LE(ev.lower, c(r) + 1e-15);
    EXPECT_GE(ev.upper, c(r) - 1e-15);
    EXPECT_LE(ev.lower, prev_lo + 1e-15);
    EXPECT_LE(ev.upper, prev_hi + 1e-15);
    prev_lo = ev.lower;
    prev_hi = ev.upper;
  }
  auto undeclared = CostSpec::custom_sampled(rs, vs);
  EXPECT_THROW(monotone_envelopes(undeclared, 1.0), std::invalid_argument);
}

TEST(Measures, RadialAverage) {
  EXPECT_NEAR(radial_average([](double) { return 1.0; }, 2.5, 3), 1.0, 1e-12);
  EXPECT_NEAR(radial_average([](double t) { return 1.0 / t; }, 1.0, 3), 1.5, 1e-10);
  EXPECT_NEAR(radial_average([](double t) { return t; }, 2.0, 1), 1.0, 1e-12);
  EXPECT_THROW(radial_average([](double t) { return 1.0 / t; }, 1.0, 1), std::domain_error);
}

TEST(Measures, KConstant) {
  auto one = K_constant(CostSpec::constant(1.0), 1.0, 2, 10000);
  EXPECT_DOUBLE_EQ(one.value, 1.0);
  // mean of 1/|x-y| for two uniform points in the unit ball is 6/5
  auto k = K_constant(CostSpec::coulomb(), 1.0, 3, 1000000, 7);
  EXPECT_GT(k.value, 0.0);
  EXPECT_NEAR(k.value, 1.2, 5 * k.std_error + 1e-3);
  EXPECT_EQ(K_constant(CostSpec::hard_sphere(), 1.0, 2).value, kInf);
}

TEST(Measures, GroundGridAndCostMatrix) {
  GroundGrid g(1, {{0.0}, {1.0}});
  EXPECT_TRUE(g.has_omega());
  EXPECT_THROW(GroundGrid(1, {{0.0}, {0.0}}), std::invalid_argument);
  auto L = cost_matrix(CostSpec::table({0.0, 1.0}, {1.0, 0.5}), g.nodes());
  EXPECT_EQ(L[0][0], 1.0);
  EXPECT_EQ(L[0][1], 0.5);
}
