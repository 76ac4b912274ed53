#include <cmath>
#include <functional>
#include <optional>
#include <random>

#include <gtest/gtest.h>

#include "psi/dfa.hpp"
#include "psi/error.hpp"
#include "psi/rng.hpp"
#include "psi/synth.hpp"
#include "support.hpp"

using namespace psi;
using psi::testing::make_trial;

namespace {

// Straightforward DFA1: absolute time index per window, 2x2 normal equations.
double reference_f(const std::vector<double>& x, int s, bool pooled) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  std::vector<double> y(x.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = acc += x[i] - mean;

  const std::size_t n = x.size() / s;
  double total = 0.0;
  for (std::size_t w = 0; w < n; ++w) {
    double st = 0, stt = 0, sy = 0, sty = 0;
    for (int k = 0; k < s; ++k) {
      const double t = static_cast<double>(w * s + k);
      const double v = y[w * s + k];
      st += t;
      stt += t * t;
      sy += v;
      sty += t * v;
    }
    const double det = s * stt - st * st;
    const double b = (s * sty - st * sy) / det;
    const double a = (sy - b * st) / s;
    double ss = 0.0;
    for (int k = 0; k < s; ++k) {
      const double r = y[w * s + k] - (a + b * static_cast<double>(w * s + k));
      ss += r * r;
    }
    total += pooled ? ss / s : std::sqrt(ss / s);
  }
  return pooled ? std::sqrt(total / n) : total / n;
}

double mean_h(const std::function<std::vector<double>(std::uint64_t)>& gen, std::uint64_t base) {
  const DfaConfig config;
  double sum = 0.0;
  int count = 0;
  for (int trial = 0; trial < 15; ++trial)
    for (int ch = 0; ch < 128; ++ch) {
      sum += dfa_channel(gen(derive_seed(base, trial * 128 + ch)), config).h;
      ++count;
    }
  return sum / count;
}

}  // namespace

TEST(Dfa, MatchesReferenceImplementation) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (bool pooled : {true, false}) {
    DfaConfig config;
    config.window_sizes = {4, 6, 10, 16, 25};
    config.average = pooled ? FluctuationAverage::pooled_rms : FluctuationAverage::mean_window_rms;
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> x(203);
      for (auto& v : x) v = normal(rng) + 0.01 * rep;
      const auto got = dfa_channel(x, config);
      ASSERT_EQ(got.fluctuations.size(), config.window_sizes.size());
      std::vector<double> ls, lf;
      for (std::size_t k = 0; k < config.window_sizes.size(); ++k) {
        const int s = config.window_sizes[k];
        const double f = reference_f(x, s, pooled);
        EXPECT_EQ(got.fluctuations[k].first, s);
        EXPECT_NEAR(got.fluctuations[k].second, f, 1e-9 * f);
        ls.push_back(std::log(s));
        lf.push_back(std::log(f));
      }
      EXPECT_NEAR(got.h, ols_slope(ls, lf), 1e-9);
    }
  }
}

TEST(Dfa, OlsSlopeOfExactLine) {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{3, 5, 7, 9};
  EXPECT_DOUBLE_EQ(ols_slope(x, y), 2.0);
}

TEST(Dfa, WhiteNoiseRecoversHalf) {
  const double h = mean_h([](std::uint64_t s) { return gen_white(256, s); }, 100);
  EXPECT_NEAR(h, 0.5, 0.07);
}

TEST(Dfa, FgnRecoversHurst) {
  const double h = mean_h([](std::uint64_t s) { return gen_fgn(0.8, 256, s); }, 200);
  EXPECT_NEAR(h, 0.8, 0.08);
}

TEST(Dfa, RandomWalkRecoversThreeHalves) {
  const double h = mean_h([](std::uint64_t s) { return gen_random_walk(256, s); }, 300);
  EXPECT_NEAR(h, 1.5, 0.15);
}

TEST(Dfa, FluctuationGrowsWithScale) {
  const auto r = dfa_channel(gen_fgn(0.7, 256, 5), DfaConfig{});
  for (std::size_t k = 1; k < r.fluctuations.size(); ++k)
    EXPECT_GT(r.fluctuations[k].second, r.fluctuations[k - 1].second);
}

TEST(Dfa, ScaleAndOffsetInvariant) {
  auto x = gen_fgn(0.6, 256, 8);
  const double h = dfa_channel(x, DfaConfig{}).h;
  for (auto& v : x) v = 3.5 * v - 12.0;
  EXPECT_NEAR(dfa_channel(x, DfaConfig{}).h, h, 1e-10);
}

TEST(Dfa, LinearProfileIsDegenerate) {
  std::vector<double> constant(64, 2.0);
  try {
    dfa_channel(constant, DfaConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate);
  }
}

TEST(Dfa, ConfigValidation) {
  DfaConfig c;
  EXPECT_NO_THROW(c.validate(64));
  EXPECT_THROW(c.validate(63), Error);
  c.window_sizes = {8};
  EXPECT_THROW(c.validate(256), Error);
  c.window_sizes = {3, 8};
  EXPECT_THROW(c.validate(256), Error);
  c.window_sizes = {8, 8};
  EXPECT_THROW(c.validate(256), Error);
  c.window_sizes = {4, 8};
  c.sigma_h = 0.0;
  EXPECT_THROW(c.validate(256), Error);
}

TEST(DfaTrial, FgnTrialIsWellTuned) {
  Matrix m(256, 128);
  for (std::size_t c = 0; c < 128; ++c) m.set_column(c, gen_fgn(0.7, 256, derive_seed(77, c)));
  const auto r = dfa_trial(preprocess(make_trial(m)), DfaConfig{}, 2);
  EXPECT_NEAR(r.h_raw, 0.7, 0.08);
  EXPECT_GE(r.h_eff, 0.85);
  EXPECT_EQ(r.fluctuation_table.rows(), 128u);
  EXPECT_EQ(r.fluctuation_table.cols(), 4u);
}

TEST(DfaTrial, IdenticalChannelsGiveIdenticalH) {
  const auto x = gen_fgn(0.7, 128, 1);
  const auto r = dfa_trial(preprocess(make_trial(psi::testing::columns_to_matrix({x, x}))), DfaConfig{});
  EXPECT_EQ(r.per_channel_h[0], r.per_channel_h[1]);
}

TEST(DfaTrial, PermutationLeavesHRawUnchanged) {
  Matrix m(128, 6);
  for (std::size_t c = 0; c < 6; ++c) m.set_column(c, gen_fgn(0.3 + 0.1 * c, 128, c));
  const auto trial = make_trial(m);
  const std::vector<std::size_t> perm{5, 2, 0, 4, 1, 3};
  const auto a = dfa_trial(preprocess(trial), DfaConfig{});
  const auto b = dfa_trial(preprocess(trial.select_channels(perm)), DfaConfig{});
  EXPECT_NEAR(a.h_raw, b.h_raw, 1e-14);
  for (std::size_t j = 0; j < perm.size(); ++j) EXPECT_EQ(b.per_channel_h[j], a.per_channel_h[perm[j]]);
}

TEST(DfaTrial, ThreadCountDoesNotChangeResult) {
  Matrix m(256, 16);
  for (std::size_t c = 0; c < 16; ++c) m.set_column(c, gen_fgn(0.7, 256, c));
  const auto pre = preprocess(make_trial(m));
  const auto a = dfa_trial(pre, DfaConfig{}, 1);
  const auto b = dfa_trial(pre, DfaConfig{}, 8);
  EXPECT_EQ(a.per_channel_h, b.per_channel_h);
  EXPECT_EQ(a.h_raw, b.h_raw);
}

TEST(DfaTrial, DegenerateChannelIsNamed) {
  // +1 then -1 halves: the profile is linear inside every window at every scale.
  std::vector<double> step(64);
  for (std::size_t i = 0; i < step.size(); ++i) step[i] = i < 32 ? 1.0 : -1.0;
  Matrix m(64, 2);
  m.set_column(0, gen_white(64, 1));
  m.set_column(1, step);
  try {
    dfa_trial(preprocess(make_trial(m)), DfaConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate);
    EXPECT_EQ(e.channel(), std::optional<std::size_t>(1));
  }
}

TEST(GaussianTuning, Values) {
  EXPECT_NEAR(gaussian_tuning(0.7, 0.7, 0.15), 1.0, 1e-12);
  EXPECT_NEAR(gaussian_tuning(0.85, 0.7, 0.15), std::exp(-0.5), 1e-12);
  EXPECT_NEAR(gaussian_tuning(0.55, 0.7, 0.15), std::exp(-0.5), 1e-12);
  for (double d : {0.01, 0.1, 0.37})
    EXPECT_NEAR(gaussian_tuning(0.7 + d, 0.7, 0.15), gaussian_tuning(0.7 - d, 0.7, 0.15), 1e-12);
  EXPECT_THROW(gaussian_tuning(0.7, 0.7, 0.0), Error);
}
