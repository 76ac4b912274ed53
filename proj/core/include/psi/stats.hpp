#pragma once

#include <span>
#include <utility>
#include <vector>

#include "psi/trial.hpp"

namespace psi {

struct AnovaTable {
  double f = 0.0;
  int df_between = 0;
  int df_within = 0;
  double p = 1.0;
  double eta_squared = 0.0;
  double ss_between = 0.0;
  double ss_within = 0.0;
};

// Classic Fisher one-way ANOVA. Needs >= 2 groups of >= 2 values and a
// nonzero within-group sum of squares.
AnovaTable one_way_anova(const std::vector<std::vector<double>>& groups);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;  // Welch-Satterthwaite
  double p = 1.0;   // two-sided
};

WelchResult welch_t(std::span<const double> a, std::span<const double> b);

struct FdrResult {
  std::vector<double> adjusted;
  std::vector<bool> rejected;
};

// Benjamini-Hochberg step-up at level q; outputs in input order.
FdrResult bh_fdr(std::span<const double> p_values, double q);

// Mean difference over the pooled (n - 1 weighted) standard deviation.
double cohens_d(std::span<const double> a, std::span<const double> b);

struct ConditionSummary {
  Condition condition;
  std::size_t n = 0;
  double mean = 0.0;
  double sem = 0.0;  // sample sd / sqrt(n); 0 when n == 1
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double iqr = 0.0;
};

ConditionSummary condition_summary(std::span<const double> values, Condition condition = {});

// Linear-interpolation quantile, position (n - 1) * p over sorted values.
double quantile_sorted(std::span<const double> sorted, double p);

double mean(std::span<const double> values);
double sample_variance(std::span<const double> values);

// Regularised incomplete beta I_x(a, b) by continued fraction.
double reg_inc_beta(double x, double a, double b);

// P(F > f) for F ~ F(d1, d2).
double f_survival(double f, double d1, double d2);

// Two-sided P(|T| >= |t|) for T ~ t(df).
double t_two_sided_p(double t, double df);

struct PairwiseComparison {
  Condition condition_a;
  Condition condition_b;
  double t = 0.0;
  double df = 0.0;
  double p_raw = 1.0;
  double p_adjusted = 1.0;
  double cohens_d = 0.0;
  bool significant = false;
};

struct StatsReport {
  AnovaTable anova;
  std::vector<PairwiseComparison> comparisons;
  std::vector<ConditionSummary> summaries;
  double q = 0.05;
};

// ANOVA across all groups, Welch t and Cohen's d for every pair, and one BH
// correction over all pairs. Groups are reported in condition order.
StatsReport build_stats_report(std::vector<std::pair<Condition, std::vector<double>>> groups, double q = 0.05);

}  // namespace psi
