#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "psi/error.hpp"
#include "psi/stats.hpp"

using namespace psi;

namespace {

// I_x(a, b) by composite Simpson on the beta density. Only used where the
// integrand is smooth on [0, x] (a >= 1, x well below 1 when b < 1).
double simpson_beta(double x, double a, double b, int n = 200000) {
  const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  auto f = [&](double t) {
    if (t <= 0.0) return a == 1.0 ? std::exp(log_norm) : 0.0;
    return std::exp(log_norm + (a - 1) * std::log(t) + (b - 1) * std::log1p(-t));
  };
  const double h = x / n;
  double sum = f(0.0) + f(x);
  for (int i = 1; i < n; ++i) sum += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no psi::Error thrown";
  return ErrorKind::config;
}

}  // namespace

TEST(IncompleteBeta, ClosedForm) {
  // I_x(2,3) = 6x^2 - 8x^3 + 3x^4.
  EXPECT_NEAR(reg_inc_beta(0.25, 2, 3), 0.26171875, 1e-14);
  EXPECT_NEAR(reg_inc_beta(0.3, 1, 1), 0.3, 1e-14);
  EXPECT_NEAR(reg_inc_beta(0.36, 0.5, 0.5), 2.0 / std::numbers::pi * std::asin(0.6), 1e-13);
  EXPECT_EQ(reg_inc_beta(0.0, 2, 3), 0.0);
  EXPECT_EQ(reg_inc_beta(1.0, 2, 3), 1.0);
}

TEST(IncompleteBeta, MatchesNumericIntegration) {
  const double cases[][3] = {{0.1, 2, 5}, {0.5, 3, 3}, {0.8235294117647058, 35, 2}, {0.6666666666666666, 4, 0.5},
                             {0.9, 10, 1.5}, {0.2, 1, 7}, {0.95, 40, 3}};
  for (const auto& c : cases) EXPECT_NEAR(reg_inc_beta(c[0], c[1], c[2]), simpson_beta(c[0], c[1], c[2]), 1e-9);
}

TEST(IncompleteBeta, ReflectionSymmetry) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0.01, 0.99), shape(0.3, 40.0);
  for (int i = 0; i < 500; ++i) {
    const double x = u(rng), a = shape(rng), b = shape(rng);
    EXPECT_NEAR(reg_inc_beta(x, a, b), 1.0 - reg_inc_beta(1.0 - x, b, a), 1e-12);
  }
}

TEST(IncompleteBeta, BadArguments) {
  EXPECT_EQ(kind_of([] { reg_inc_beta(1.5, 1, 1); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { reg_inc_beta(0.5, 0, 1); }), ErrorKind::config);
}

TEST(FDistribution, ReportedAnovaPValue) {
  const double p = f_survival(3.75, 4, 70);
  EXPECT_NEAR(p, 0.008, 0.001);
  EXPECT_NEAR(p, simpson_beta(70.0 / (70.0 + 4 * 3.75), 35, 2), 1e-9);
  EXPECT_EQ(f_survival(0.0, 4, 70), 1.0);
}

TEST(TDistribution, TwoSidedP) {
  EXPECT_NEAR(t_two_sided_p(-2.0, 8), simpson_beta(8.0 / 12.0, 4, 0.5), 1e-9);
  EXPECT_NEAR(t_two_sided_p(-2.0, 8), 0.0805, 5e-4);
  EXPECT_EQ(t_two_sided_p(2.0, 8), t_two_sided_p(-2.0, 8));
  EXPECT_EQ(t_two_sided_p(0.0, 8), 1.0);
  // df = 1 is Cauchy: p = 1 - 2 atan(|t|) / pi.
  EXPECT_NEAR(t_two_sided_p(1.7, 1), 1.0 - 2.0 * std::atan(1.7) / std::numbers::pi, 1e-12);
}

TEST(Anova, HandComputed) {
  const auto a = one_way_anova({{1, 2, 3}, {2, 3, 4}, {3, 4, 5}});
  EXPECT_NEAR(a.f, 3.0, 1e-12);
  EXPECT_EQ(a.df_between, 2);
  EXPECT_EQ(a.df_within, 6);
  EXPECT_NEAR(a.ss_between, 6.0, 1e-12);
  EXPECT_NEAR(a.ss_within, 6.0, 1e-12);
  EXPECT_NEAR(a.eta_squared, 0.5, 1e-12);
  EXPECT_NEAR(a.p, f_survival(3.0, 2, 6), 1e-15);
  // F(2,6) survival has the closed form (1 + F/3)^-3.
  EXPECT_NEAR(a.p, std::pow(2.0, -3), 1e-12);
}

TEST(Anova, EqualMeans) {
  const auto a = one_way_anova({{1, 3}, {2, 2}});
  EXPECT_EQ(a.f, 0.0);
  EXPECT_EQ(a.p, 1.0);
}

TEST(Anova, Errors) {
  EXPECT_EQ(kind_of([] { one_way_anova({{1, 2, 3}}); }), ErrorKind::arity);
  EXPECT_EQ(kind_of([] { one_way_anova({{1, 1}, {2, 2}}); }), ErrorKind::degenerate);
}

TEST(Anova, AffineInvariant) {
  const std::vector<std::vector<double>> g{{0.3, 1.2, -0.4, 0.8}, {1.5, 2.2, 1.9}, {-1.0, 0.1, -0.6, 0.0, 0.4}};
  auto h = g;
  for (auto& grp : h)
    for (auto& v : grp) v = 4.0 * v - 7.0;
  const auto a = one_way_anova(g), b = one_way_anova(h);
  EXPECT_NEAR(a.f, b.f, 1e-10 * a.f);
  EXPECT_NEAR(a.p, b.p, 1e-12);
}

TEST(Anova, NullCalibration) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  auto draw = [&] {
    std::vector<std::vector<double>> g(5, std::vector<double>(15));
    for (auto& grp : g)
      for (auto& v : grp) v = normal(rng);
    return one_way_anova(g).p;
  };
  EXPECT_GT(draw(), 0.2);
  int rejections = 0;
  const int runs = 2000;
  for (int i = 0; i < runs; ++i) rejections += draw() < 0.05;
  // Binomial(2000, 0.05): sd ~ 9.7.
  EXPECT_NEAR(rejections, 100, 40);
}

TEST(Welch, HandComputed) {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{3, 4, 5, 6, 7};
  const auto w = welch_t(a, b);
  EXPECT_NEAR(w.t, -2.0, 1e-12);
  EXPECT_NEAR(w.df, 8.0, 1e-12);
  EXPECT_NEAR(w.p, 0.0805, 5e-4);
}

TEST(Welch, UnequalVarianceDf) {
  const std::vector<double> a{1, 2, 3}, b{2, 6, 10, 14};
  const auto w = welch_t(a, b);
  const double va = 1.0 / 3, vb = (80.0 / 3) / 4;
  EXPECT_NEAR(w.t, (2.0 - 8.0) / std::sqrt(va + vb), 1e-12);
  EXPECT_NEAR(w.df, (va + vb) * (va + vb) / (va * va / 2 + vb * vb / 3), 1e-12);
}

TEST(Welch, IdenticalAndConstant) {
  const std::vector<double> a{1, 2, 3};
  const auto w = welch_t(a, a);
  EXPECT_EQ(w.t, 0.0);
  EXPECT_EQ(w.p, 1.0);
  const std::vector<double> z{0, 0, 0, 0}, o{1, 1, 1, 1};
  EXPECT_EQ(kind_of([&] { welch_t(z, o); }), ErrorKind::degenerate);
}

TEST(BenjaminiHochberg, StepUpExample) {
  const std::vector<double> p{0.002, 0.01, 0.03, 0.04};
  const auto r = bh_fdr(p, 0.05);
  const std::vector<double> expect{0.008, 0.02, 0.04, 0.04};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(r.adjusted[i], expect[i], 1e-15);
    EXPECT_TRUE(r.rejected[i]);
  }
}

TEST(BenjaminiHochberg, MatchesDefinitionOnShuffledInput) {
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> u(0.0, 0.2);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> p(1 + rep % 17);
    for (auto& v : p) v = u(rng);
    const auto r = bh_fdr(p, 0.05);
    const auto m = static_cast<double>(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      // adjusted_i = min over p_j >= p_i of m p_j / rank_j
      double best = 1.0;
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (p[j] < p[i]) continue;
        const auto rank = std::count_if(p.begin(), p.end(), [&](double v) { return v <= p[j]; });
        best = std::min(best, m * p[j] / static_cast<double>(rank));
      }
      EXPECT_NEAR(r.adjusted[i], best, 1e-12);
      EXPECT_EQ(r.rejected[i], r.adjusted[i] <= 0.05);
    }
  }
}

TEST(BenjaminiHochberg, Boundaries) {
  const std::vector<double> one{0.03};
  const auto r1 = bh_fdr(one, 0.05);
  EXPECT_EQ(r1.adjusted[0], 0.03);
  EXPECT_TRUE(r1.rejected[0]);
  EXPECT_FALSE(bh_fdr(std::vector<double>{0.07}, 0.05).rejected[0]);
  const auto r = bh_fdr(std::vector<double>{1.0, 1.0, 1.0}, 0.05);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r.adjusted[i], 1.0);
    EXPECT_FALSE(r.rejected[i]);
  }
}

TEST(CohensD, HandComputed) {
  EXPECT_NEAR(cohens_d(std::vector<double>{1, 2, 3}, std::vector<double>{3, 4, 5}), -2.0, 1e-12);
  EXPECT_EQ(cohens_d(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), 0.0);
  EXPECT_EQ(kind_of([] { cohens_d(std::vector<double>{1, 1}, std::vector<double>{2, 2}); }), ErrorKind::degenerate);
}

TEST(Summary, Quartiles) {
  const auto s = condition_summary(std::vector<double>{4, 1, 3, 2});
  EXPECT_EQ(s.n, 4u);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.q25, 1.75);
  EXPECT_DOUBLE_EQ(s.q75, 3.25);
  EXPECT_DOUBLE_EQ(s.iqr, 1.5);
  EXPECT_NEAR(s.sem, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);

  const auto c = condition_summary(std::vector<double>{2, 2, 2});
  EXPECT_EQ(c.sem, 0.0);
  EXPECT_EQ(c.iqr, 0.0);
  EXPECT_EQ(condition_summary(std::vector<double>{7}).sem, 0.0);
}

TEST(StatsReport, TwoConditionsGiveOneComparison) {
  const auto r = build_stats_report({{ConditionKind::intact_noisy, {1.0, 1.4, 0.8}},
                                     {ConditionKind::intact_complex, {2.0, 2.5, 1.7, 2.2}}});
  ASSERT_EQ(r.comparisons.size(), 1u);
  EXPECT_EQ(r.comparisons[0].p_adjusted, r.comparisons[0].p_raw);
  EXPECT_EQ(r.comparisons[0].condition_a, Condition(ConditionKind::intact_complex));
  ASSERT_EQ(r.summaries.size(), 2u);
  EXPECT_EQ(r.summaries[0].condition, Condition(ConditionKind::intact_complex));
}

TEST(StatsReport, AllPairsForFiveConditions) {
  std::vector<std::pair<Condition, std::vector<double>>> groups;
  for (std::size_t i = 0; i < 5; ++i)
    groups.push_back({standard_conditions()[i], {double(i), i + 0.5, i + 0.2, i - 0.3}});
  const auto r = build_stats_report(groups, 0.05);
  EXPECT_EQ(r.comparisons.size(), 10u);
  EXPECT_EQ(r.anova.df_between, 4);
  EXPECT_EQ(r.anova.df_within, 15);
}

TEST(StatsReport, InsufficientGroups) {
  EXPECT_EQ(kind_of([] { build_stats_report({{ConditionKind::intact_noisy, {1.0, 2.0}}}); }), ErrorKind::arity);
  EXPECT_EQ(kind_of([] {
              build_stats_report({{ConditionKind::intact_noisy, {1.0, 2.0}}, {ConditionKind::intact_complex, {1.0}}});
            }),
            ErrorKind::arity);
}
