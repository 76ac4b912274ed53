#include <algorithm>

#include <gtest/gtest.h>

#include "psi/error.hpp"
#include "psi/report.hpp"
#include "psi/robustness.hpp"
#include "psi/synth.hpp"

using namespace psi;

namespace {

const std::vector<ActivationTrial>& small_battery() {
  static const auto trials = make_battery(3, 7, 128, 32);
  return trials;
}

RunConfig config() {
  RunConfig c;
  c.threads = 2;
  c.seed = 11;
  return c;
}

}  // namespace

TEST(LayerColumns, EarlyLateAll) {
  const auto& t = small_battery().front();
  const auto early = layer_columns(t, LayerSubset::early);
  const auto late = layer_columns(t, LayerSubset::late);
  ASSERT_EQ(early.size(), 16u);
  ASSERT_EQ(late.size(), 16u);
  EXPECT_EQ(early.front(), 0u);
  EXPECT_EQ(late.front(), 16u);
  EXPECT_EQ(layer_columns(t, LayerSubset::all).size(), 32u);
}

TEST(LayerColumns, MissingOrEmptyAttributionIsMetadataError) {
  auto t = small_battery().front();
  t.block_ids = {2, 3, 5, 6};
  try {
    layer_columns(t, LayerSubset::early);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::metadata);
  }
  t.block_ids.clear();
  try {
    layer_columns(t, LayerSubset::late);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::metadata);
  }
  EXPECT_NO_THROW(layer_columns(t, LayerSubset::all));
}

TEST(SampleChannels, SortedDistinctDeterministic) {
  const auto a = sample_channels(128, 0.5, 9);
  EXPECT_EQ(a.size(), 64u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(std::adjacent_find(a.begin(), a.end()), a.end());
  EXPECT_LT(a.back(), 128u);
  EXPECT_EQ(a, sample_channels(128, 0.5, 9));
  EXPECT_NE(a, sample_channels(128, 0.5, 10));
  EXPECT_EQ(sample_channels(32, 1.0, 1).size(), 32u);
  try {
    sample_channels(20, 0.25, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::arity);
  }
  EXPECT_THROW(sample_channels(32, 0.0, 1), Error);
}

TEST(Robustness, IdentitySubsetReproducesMainPipeline) {
  const auto& trials = small_battery();
  const auto main = run_pool(trials, config());
  const auto all = layer_columns(trials.front(), LayerSubset::all);
  EXPECT_TRUE(rerun_on_channels(trials, all, config()) == main);

  const auto run = layer_subset_run(trials, LayerSubset::all, config());
  const auto means = condition_means(main);
  ASSERT_EQ(run.conditions.size(), means.size());
  for (std::size_t i = 0; i < means.size(); ++i) {
    EXPECT_EQ(run.conditions[i].condition, means[i].first);
    EXPECT_EQ(run.conditions[i].mean_psi, means[i].second);
  }

  const std::vector<std::uint64_t> seeds{1, 2};
  const auto full = channel_subsample_run(trials, 1.0, seeds, config());
  for (std::size_t i = 0; i < means.size(); ++i) {
    EXPECT_EQ(full.conditions[i].per_seed[0], means[i].second);
    EXPECT_EQ(full.conditions[i].std_across_seeds, 0.0);
  }
}

TEST(Robustness, LayerReportKeepsOrdering) {
  const auto report = layer_report(small_battery(), config());
  ASSERT_EQ(report.runs.size(), 3u);
  EXPECT_EQ(report.runs[0].label, "early");
  EXPECT_EQ(report.runs[2].label, "all");
  EXPECT_TRUE(report.ordering_stable);
  EXPECT_FALSE(report.low_n);
}

TEST(Robustness, SubsampleIsDeterministic) {
  const auto a = subsample_report(small_battery(), config());
  auto other = config();
  other.threads = 1;
  const auto b = subsample_report(small_battery(), other);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  ASSERT_EQ(a.runs.size(), 2u);
  EXPECT_EQ(a.runs[0].seeds.size(), 3u);
  EXPECT_EQ(a.runs[0].label, "fraction=0.25");
  for (const auto& c : a.runs[1].conditions) EXPECT_LE(c.std_across_seeds, 0.25);
}

TEST(Robustness, SingleSeedHasZeroSpread) {
  const auto r = multi_seed_run(small_battery(), config(), 0.5, 1);
  ASSERT_EQ(r.runs.size(), 1u);
  for (const auto& c : r.runs[0].conditions) {
    EXPECT_EQ(c.std_across_seeds, 0.0);
    EXPECT_EQ(c.per_seed.size(), 1u);
  }
}

TEST(Robustness, SingleTrialPerConditionFlagsLowN) {
  const auto trials = make_battery(1, 5, 128, 32);
  const auto r = layer_report(trials, config());
  EXPECT_TRUE(r.low_n);
}

TEST(Robustness, DerivedSeedsUseDistinctStreams) {
  const auto a = derived_seeds(4, 3, 1), b = derived_seeds(4, 3, 2);
  EXPECT_EQ(a.size(), 3u);
  for (auto s : a) EXPECT_EQ(std::count(b.begin(), b.end(), s), 0);
  EXPECT_EQ(parse_robustness_mode("seeds"), RobustnessMode::seeds);
  EXPECT_THROW(parse_robustness_mode("x"), Error);
}
