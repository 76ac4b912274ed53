#include "psi/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "psi/error.hpp"

namespace psi {

double mean(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size() - 1);
}

AnovaTable one_way_anova(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw Error(ErrorKind::arity, "ANOVA needs at least two groups");
  std::size_t total_n = 0;
  double grand = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw Error(ErrorKind::arity, "every ANOVA group needs at least two values");
    total_n += g.size();
    for (double v : g) grand += v;
  }
  grand /= static_cast<double>(total_n);

  AnovaTable out;
  for (const auto& g : groups) {
    const double gm = mean(g);
    out.ss_between += static_cast<double>(g.size()) * (gm - grand) * (gm - grand);
    for (double v : g) out.ss_within += (v - gm) * (v - gm);
  }
  if (!(out.ss_within > 0.0)) throw Error(ErrorKind::degenerate, "ANOVA groups have zero within-group variance");

  out.df_between = static_cast<int>(groups.size()) - 1;
  out.df_within = static_cast<int>(total_n - groups.size());
  out.f = (out.ss_between / out.df_between) / (out.ss_within / out.df_within);
  out.p = f_survival(out.f, out.df_between, out.df_within);
  out.eta_squared = out.ss_between / (out.ss_between + out.ss_within);
  return out;
}

WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error(ErrorKind::arity, "Welch t-test needs at least two values per sample");
  const double va = sample_variance(a) / static_cast<double>(a.size());
  const double vb = sample_variance(b) / static_cast<double>(b.size());
  if (!(va + vb > 0.0)) throw Error(ErrorKind::degenerate, "Welch t-test: both samples are constant");

  WelchResult out;
  out.t = (mean(a) - mean(b)) / std::sqrt(va + vb);
  out.df = (va + vb) * (va + vb) /
           (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  out.p = t_two_sided_p(out.t, out.df);
  return out;
}

FdrResult bh_fdr(std::span<const double> p_values, double q) {
  if (!(q > 0.0 && q < 1.0)) throw Error(ErrorKind::config, fmt::format("FDR level q = {} must lie in (0, 1)", q));
  for (double p : p_values)
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::config, fmt::format("p-value {} outside [0, 1]", p));

  const auto m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return p_values[i] < p_values[j]; });

  FdrResult out{std::vector<double>(m), std::vector<bool>(m, false)};
  std::size_t last_rejected = 0;  // 1-based rank, 0 when none
  for (std::size_t rank = 1; rank <= m; ++rank)
    if (p_values[order[rank - 1]] <= static_cast<double>(rank) * q / static_cast<double>(m)) last_rejected = rank;

  double running = 1.0;
  for (std::size_t rank = m; rank >= 1; --rank) {
    const auto idx = order[rank - 1];
    running = std::min(running, static_cast<double>(m) * p_values[idx] / static_cast<double>(rank));
    out.adjusted[idx] = running;
    out.rejected[idx] = rank <= last_rejected;
  }
  return out;
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error(ErrorKind::arity, "Cohen's d needs at least two values per sample");
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  const double pooled = std::sqrt(((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / (na + nb - 2.0));
  if (!(pooled > 0.0)) throw Error(ErrorKind::degenerate, "Cohen's d: pooled standard deviation is zero");
  return (mean(a) - mean(b)) / pooled;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  const double pos = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ConditionSummary condition_summary(std::span<const double> values, Condition condition) {
  if (values.empty()) throw Error(ErrorKind::arity, "summary of an empty sample");
  ConditionSummary out;
  out.condition = std::move(condition);
  out.n = values.size();
  out.mean = mean(values);
  out.sem = values.size() > 1 ? std::sqrt(sample_variance(values) / static_cast<double>(values.size())) : 0.0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  out.median = quantile_sorted(sorted, 0.5);
  out.q25 = quantile_sorted(sorted, 0.25);
  out.q75 = quantile_sorted(sorted, 0.75);
  out.iqr = out.q75 - out.q25;
  return out;
}

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double x, double a, double b) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw Error(ErrorKind::numeric, fmt::format("incomplete beta did not converge for x={}, a={}, b={}", x, a, b));
}

}  // namespace

double reg_inc_beta(double x, double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw Error(ErrorKind::config, "incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorKind::config, fmt::format("incomplete beta argument {} outside [0, 1]", x));
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fastest below the mean; reflect otherwise.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
  return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double f_survival(double f, double d1, double d2) {
  if (!(f > 0.0)) return 1.0;
  if (std::isinf(f)) return 0.0;
  return reg_inc_beta(d2 / (d2 + d1 * f), d2 / 2.0, d1 / 2.0);
}

double t_two_sided_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return reg_inc_beta(df / (df + t * t), df / 2.0, 0.5);
}

StatsReport build_stats_report(std::vector<std::pair<Condition, std::vector<double>>> groups, double q) {
  if (groups.size() < 2) throw Error(ErrorKind::arity, "statistics need at least two conditions");
  std::sort(groups.begin(), groups.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

  StatsReport report;
  report.q = q;
  std::vector<std::vector<double>> values;
  for (const auto& [condition, v] : groups) {
    if (v.size() < 2)
      throw Error(ErrorKind::arity, fmt::format("condition '{}' has {} trial(s); need at least 2", condition.name(), v.size()));
    values.push_back(v);
    report.summaries.push_back(condition_summary(v, condition));
  }
  report.anova = one_way_anova(values);

  std::vector<double> raw;
  for (std::size_t i = 0; i < groups.size(); ++i)
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      PairwiseComparison c;
      c.condition_a = groups[i].first;
      c.condition_b = groups[j].first;
      const auto w = welch_t(values[i], values[j]);
      c.t = w.t;
      c.df = w.df;
      c.p_raw = w.p;
      c.cohens_d = cohens_d(values[i], values[j]);
      raw.push_back(w.p);
      report.comparisons.push_back(std::move(c));
    }

  const auto fdr = bh_fdr(raw, q);
  for (std::size_t k = 0; k < report.comparisons.size(); ++k) {
    report.comparisons[k].p_adjusted = fdr.adjusted[k];
    report.comparisons[k].significant = fdr.rejected[k];
  }
  return report;
}

}  // namespace psi
