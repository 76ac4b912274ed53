#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "psi/composite.hpp"
#include "psi/dfa.hpp"
#include "psi/metastability.hpp"
#include "psi/phase.hpp"
#include "psi/trial.hpp"

namespace psi {

struct RunConfig {
  BandpassSpec band;
  DfaConfig dfa;
  PsiWeights weights;
  double q = 0.05;
  std::filesystem::path output_dir = ".";
  int threads = 0;  // 0 = one per hardware thread
  std::size_t trim = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);

struct TrialAnalysis {
  ComponentScores scores;
  DfaResult dfa;
  SyncSeries sync;
};

// preprocess -> DFA -> metastability for one trial, single-threaded.
TrialAnalysis analyze_trial_detailed(const ActivationTrial& trial, const RunConfig& config);
ComponentScores analyze_trial(const ActivationTrial& trial, const RunConfig& config);

struct PoolResult {
  std::vector<ComponentScores> scores;
  std::vector<PsiResult> psi;
  std::vector<std::string> pool_ids;  // trial ids in pool order

  friend bool operator==(const PoolResult&, const PoolResult&);
};

// Per-trial analysis fanned out over config.threads, then pooled z-scoring in
// input order. Failures name the offending trial.
PoolResult run_pool(std::span<const ActivationTrial> trials, const RunConfig& config);

}  // namespace psi
