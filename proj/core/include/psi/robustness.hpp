#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "psi/pipeline.hpp"
#include "psi/trial.hpp"

namespace psi {

enum class RobustnessMode { layers, subsample, seeds };
enum class LayerSubset { early, late, all };

std::string_view to_string(RobustnessMode mode) noexcept;
std::string_view to_string(LayerSubset subset) noexcept;
RobustnessMode parse_robustness_mode(std::string_view name);

struct ConditionRobustness {
  Condition condition;
  double mean_psi = 0.0;          // mean over seeds of the per-seed condition mean
  double std_across_seeds = 0.0;  // sample sd, 0 with a single seed
  std::vector<double> per_seed;   // per-seed condition mean, in seed order
};

// One rerun configuration (a layer subset, or one subsampling fraction over
// several seeds). Every seed is an independently re-z-scored pool.
struct RobustnessRun {
  std::string label;
  std::vector<std::uint64_t> seeds;  // empty for layer subsets
  std::vector<ConditionRobustness> conditions;
  std::size_t pools = 0;
  std::size_t pools_ordering_held = 0;  // intact_complex highest and intact_repetition lowest
  std::size_t pools_complex_top = 0;    // intact_complex above every other condition
  bool ordering_stable = false;         // ordering held in every pool
};

struct RobustnessReport {
  RobustnessMode mode = RobustnessMode::layers;
  std::vector<RobustnessRun> runs;
  bool ordering_stable = false;  // every run stable
  bool low_n = false;            // some condition has fewer than two trials
};

// Columns whose block belongs to the subset: early = {1, 4}, late = {7, 10}.
std::vector<std::size_t> layer_columns(const ActivationTrial& trial, LayerSubset subset);

// Distinct columns, floor(fraction * c) of them, sorted ascending.
std::vector<std::size_t> sample_channels(std::size_t channels, double fraction, std::uint64_t seed);

// Restricts every trial to `columns` and reruns the full pipeline on that pool.
PoolResult rerun_on_channels(std::span<const ActivationTrial> trials, std::span<const std::size_t> columns,
                             const RunConfig& config);

// Per-condition mean psi of one pool, conditions in canonical order.
std::vector<std::pair<Condition, double>> condition_means(const PoolResult& pool);

RobustnessRun layer_subset_run(std::span<const ActivationTrial> trials, LayerSubset subset, const RunConfig& config);
RobustnessReport layer_report(std::span<const ActivationTrial> trials, const RunConfig& config);

RobustnessRun channel_subsample_run(std::span<const ActivationTrial> trials, double fraction,
                                    std::span<const std::uint64_t> seeds, const RunConfig& config);

// Fractions {0.25, 0.5}, three seeds each derived from config.seed.
RobustnessReport subsample_report(std::span<const ActivationTrial> trials, const RunConfig& config);

// Fraction 0.5 (by default) resampled under n_seeds seeds derived from config.seed.
RobustnessReport multi_seed_run(std::span<const ActivationTrial> trials, const RunConfig& config,
                                double fraction = 0.5, std::size_t n_seeds = 5);

std::vector<std::uint64_t> derived_seeds(std::uint64_t base, std::size_t n, std::uint64_t stream = 0);

}  // namespace psi
