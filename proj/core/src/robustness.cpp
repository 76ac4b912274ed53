#include "psi/robustness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "psi/error.hpp"
#include "psi/rng.hpp"

namespace psi {

std::string_view to_string(RobustnessMode mode) noexcept {
  switch (mode) {
    case RobustnessMode::layers: return "layers";
    case RobustnessMode::subsample: return "subsample";
    case RobustnessMode::seeds: return "seeds";
  }
  return "unknown";
}

std::string_view to_string(LayerSubset subset) noexcept {
  switch (subset) {
    case LayerSubset::early: return "early";
    case LayerSubset::late: return "late";
    case LayerSubset::all: return "all";
  }
  return "unknown";
}

RobustnessMode parse_robustness_mode(std::string_view name) {
  if (name == "layers") return RobustnessMode::layers;
  if (name == "subsample") return RobustnessMode::subsample;
  if (name == "seeds") return RobustnessMode::seeds;
  throw Error(ErrorKind::config, fmt::format("unknown robustness mode '{}'", name));
}

std::vector<std::size_t> layer_columns(const ActivationTrial& trial, LayerSubset subset) {
  std::vector<std::size_t> out;
  if (subset == LayerSubset::all) {
    out.resize(trial.channels());
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }
  const auto blocks = trial.channel_blocks();
  if (blocks.empty())
    throw Error(ErrorKind::metadata, fmt::format("trial '{}' carries no channel-to-block attribution", trial.trial_id));
  const std::vector<int> wanted = subset == LayerSubset::early ? std::vector<int>{1, 4} : std::vector<int>{7, 10};
  for (std::size_t c = 0; c < blocks.size(); ++c)
    if (std::find(wanted.begin(), wanted.end(), blocks[c]) != wanted.end()) out.push_back(c);
  if (out.empty())
    throw Error(ErrorKind::metadata, fmt::format("trial '{}' has no channels from the {} blocks", trial.trial_id,
                                                 to_string(subset)));
  return out;
}

std::vector<std::size_t> sample_channels(std::size_t channels, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorKind::config, fmt::format("fraction {} outside (0, 1]", fraction));
  const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(channels)));
  if (k < 8)
    throw Error(ErrorKind::arity, fmt::format("subsampling {} of {} channels keeps {} < 8", fraction, channels, k));

  // Partial Fisher-Yates.
  std::vector<std::size_t> idx(channels);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.next() % (channels - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

PoolResult rerun_on_channels(std::span<const ActivationTrial> trials, std::span<const std::size_t> columns,
                             const RunConfig& config) {
  std::vector<ActivationTrial> restricted;
  restricted.reserve(trials.size());
  for (const auto& t : trials) restricted.push_back(t.select_channels(columns));
  return run_pool(restricted, config);
}

std::vector<std::pair<Condition, double>> condition_means(const PoolResult& pool) {
  std::map<Condition, std::pair<double, std::size_t>> acc;
  for (const auto& r : pool.psi) {
    auto& [sum, n] = acc[r.condition];
    sum += r.psi;
    ++n;
  }
  std::vector<std::pair<Condition, double>> out;
  for (const auto& [c, v] : acc) out.emplace_back(c, v.first / static_cast<double>(v.second));
  return out;
}

namespace {

struct OrderingCheck {
  bool held = false;
  bool complex_top = false;
};

OrderingCheck check_ordering(const std::vector<std::pair<Condition, double>>& means) {
  const Condition complex = ConditionKind::intact_complex;
  const Condition repetition = ConditionKind::intact_repetition;
  auto find = [&](const Condition& c) {
    return std::find_if(means.begin(), means.end(), [&](const auto& p) { return p.first == c; });
  };
  const auto ic = find(complex);
  const auto ir = find(repetition);
  OrderingCheck out;
  if (ic == means.end()) return out;
  out.complex_top = std::all_of(means.begin(), means.end(),
                                [&](const auto& p) { return p.first == complex || p.second < ic->second; });
  if (ir == means.end()) return out;
  const bool rep_bottom = std::all_of(means.begin(), means.end(),
                                      [&](const auto& p) { return p.first == repetition || p.second > ir->second; });
  out.held = out.complex_top && rep_bottom;
  return out;
}

RobustnessRun aggregate(std::string label, std::vector<std::uint64_t> seeds, const std::vector<PoolResult>& pools) {
  RobustnessRun run;
  run.label = std::move(label);
  run.seeds = std::move(seeds);
  run.pools = pools.size();

  std::map<Condition, std::vector<double>> per_condition;
  for (const auto& pool : pools) {
    const auto means = condition_means(pool);
    const auto check = check_ordering(means);
    run.pools_ordering_held += check.held ? 1 : 0;
    run.pools_complex_top += check.complex_top ? 1 : 0;
    for (const auto& [c, m] : means) per_condition[c].push_back(m);
  }
  run.ordering_stable = run.pools > 0 && run.pools_ordering_held == run.pools;

  for (auto& [c, values] : per_condition) {
    ConditionRobustness cr;
    cr.condition = c;
    cr.mean_psi = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - cr.mean_psi) * (v - cr.mean_psi);
      cr.std_across_seeds = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    cr.per_seed = std::move(values);
    run.conditions.push_back(std::move(cr));
  }
  return run;
}

bool has_low_n(std::span<const ActivationTrial> trials) {
  std::map<Condition, std::size_t> counts;
  for (const auto& t : trials) ++counts[t.condition];
  return std::any_of(counts.begin(), counts.end(), [](const auto& p) { return p.second < 2; });
}

void finish(RobustnessReport& report, std::span<const ActivationTrial> trials) {
  report.ordering_stable = !report.runs.empty() &&
                           std::all_of(report.runs.begin(), report.runs.end(), [](const auto& r) { return r.ordering_stable; });
  report.low_n = has_low_n(trials);
}

}  // namespace

std::vector<std::uint64_t> derived_seeds(std::uint64_t base, std::size_t n, std::uint64_t stream) {
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(derive_seed(base, stream * 1000 + i));
  return out;
}

RobustnessRun layer_subset_run(std::span<const ActivationTrial> trials, LayerSubset subset, const RunConfig& config) {
  if (trials.empty()) throw Error(ErrorKind::arity, "no trials");
  const auto columns = layer_columns(trials.front(), subset);
  for (const auto& t : trials)
    if (layer_columns(t, subset) != columns)
      throw Error(ErrorKind::metadata, fmt::format("trial '{}' has a different block layout", t.trial_id));
  return aggregate(std::string(to_string(subset)), {}, {rerun_on_channels(trials, columns, config)});
}

RobustnessReport layer_report(std::span<const ActivationTrial> trials, const RunConfig& config) {
  RobustnessReport report;
  report.mode = RobustnessMode::layers;
  for (auto subset : {LayerSubset::early, LayerSubset::late, LayerSubset::all})
    report.runs.push_back(layer_subset_run(trials, subset, config));
  finish(report, trials);
  return report;
}

RobustnessRun channel_subsample_run(std::span<const ActivationTrial> trials, double fraction,
                                    std::span<const std::uint64_t> seeds, const RunConfig& config) {
  if (trials.empty()) throw Error(ErrorKind::arity, "no trials");
  if (seeds.empty()) throw Error(ErrorKind::config, "channel subsampling needs at least one seed");
  std::vector<PoolResult> pools;
  for (auto seed : seeds) {
    const auto columns = sample_channels(trials.front().channels(), fraction, seed);
    pools.push_back(rerun_on_channels(trials, columns, config));
  }
  return aggregate(fmt::format("fraction={:.2f}", fraction), {seeds.begin(), seeds.end()}, pools);
}

RobustnessReport subsample_report(std::span<const ActivationTrial> trials, const RunConfig& config) {
  RobustnessReport report;
  report.mode = RobustnessMode::subsample;
  std::uint64_t stream = 1;
  for (double fraction : {0.25, 0.5})
    report.runs.push_back(channel_subsample_run(trials, fraction, derived_seeds(config.seed, 3, stream++), config));
  finish(report, trials);
  return report;
}

RobustnessReport multi_seed_run(std::span<const ActivationTrial> trials, const RunConfig& config, double fraction,
                                std::size_t n_seeds) {
  RobustnessReport report;
  report.mode = RobustnessMode::seeds;
  report.runs.push_back(channel_subsample_run(trials, fraction, derived_seeds(config.seed, n_seeds, 3), config));
  finish(report, trials);
  return report;
}

}  // namespace psi
