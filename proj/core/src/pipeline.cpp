#include "psi/pipeline.hpp"

#include <fmt/format.h>

#include "psi/error.hpp"
#include "psi/parallel.hpp"

namespace psi {

void RunConfig::validate() const {
  band.validate();
  if (!(dfa.sigma_h > 0.0)) throw Error(ErrorKind::config, "sigma_h must be positive");
  psi_weights_override(weights.w_h, weights.w_m);
  if (!(q > 0.0 && q < 1.0)) throw Error(ErrorKind::config, fmt::format("q = {} must lie in (0, 1)", q));
  if (threads < 0) throw Error(ErrorKind::config, "threads must be >= 0");
}

nlohmann::json to_json(const RunConfig& config) {
  return {
      {"band", {{"low_cut", config.band.low_cut}, {"high_cut", config.band.high_cut}, {"order", config.band.order},
                {"sample_rate", config.band.sample_rate}}},
      {"dfa", {{"window_sizes", config.dfa.window_sizes}, {"h_opt", config.dfa.h_opt}, {"sigma_h", config.dfa.sigma_h},
               {"average", config.dfa.average == FluctuationAverage::pooled_rms ? "pooled_rms" : "mean_window_rms"}}},
      {"weights", {{"w_h", config.weights.w_h}, {"w_m", config.weights.w_m}}},
      {"q", config.q},
      {"trim", config.trim},
      {"seed", config.seed},
  };
}

TrialAnalysis analyze_trial_detailed(const ActivationTrial& trial, const RunConfig& config) {
  const auto pre = preprocess(trial);
  TrialAnalysis out;
  out.dfa = dfa_trial(pre, config.dfa, 1);
  out.sync = metastability_trial(pre, config.band, config.trim, 1);
  out.scores = {trial.trial_id, trial.condition, out.dfa.h_raw, out.dfa.h_eff, out.sync.m};
  return out;
}

ComponentScores analyze_trial(const ActivationTrial& trial, const RunConfig& config) {
  return analyze_trial_detailed(trial, config).scores;
}

bool operator==(const PoolResult& a, const PoolResult& b) {
  if (a.pool_ids != b.pool_ids || a.scores.size() != b.scores.size() || a.psi.size() != b.psi.size()) return false;
  for (std::size_t i = 0; i < a.scores.size(); ++i) {
    const auto& x = a.scores[i];
    const auto& y = b.scores[i];
    if (x.trial_id != y.trial_id || x.condition != y.condition || x.h_raw != y.h_raw || x.h_eff != y.h_eff || x.m != y.m)
      return false;
  }
  for (std::size_t i = 0; i < a.psi.size(); ++i) {
    const auto& x = a.psi[i];
    const auto& y = b.psi[i];
    if (x.trial_id != y.trial_id || x.condition != y.condition || x.h_z != y.h_z || x.m_z != y.m_z || x.psi != y.psi)
      return false;
  }
  return true;
}

PoolResult run_pool(std::span<const ActivationTrial> trials, const RunConfig& config) {
  config.validate();
  if (trials.size() < 2) throw Error(ErrorKind::arity, "a pool needs at least two trials");

  PoolResult out;
  out.scores.resize(trials.size());
  parallel_for(trials.size(), config.threads, [&](std::size_t i) {
    try {
      out.scores[i] = analyze_trial(trials[i], config);
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("trial '{}': {}", trials[i].trial_id, e.what()));
    }
  });
  out.psi = pool_zscore(out.scores, config.weights);
  for (const auto& t : trials) out.pool_ids.push_back(t.trial_id);
  return out;
}

}  // namespace psi
