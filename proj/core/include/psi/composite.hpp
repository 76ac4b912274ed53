#pragma once

#include <span>
#include <string>
#include <vector>

#include "psi/trial.hpp"

namespace psi {

struct ComponentScores {
  std::string trial_id;
  Condition condition;
  double h_raw = 0.0;
  double h_eff = 0.0;
  double m = 0.0;
};

struct PsiWeights {
  double w_h = 0.5;
  double w_m = 0.5;
  friend bool operator==(const PsiWeights&, const PsiWeights&) = default;
};

// Validated weights for psi = w_h * h_z + w_m * m_z. Both must be >= 0 and
// sum to 1 (within 1e-12).
PsiWeights psi_weights_override(double w_h, double w_m);

struct PsiResult {
  std::string trial_id;
  Condition condition;
  double h_z = 0.0;
  double m_z = 0.0;
  double psi = 0.0;
};

inline constexpr double kDegeneratePoolSd = 1e-12;

// z-scores h_eff and m against the pooled mean and population sd and combines
// them. Output order follows input order. Psi is only meaningful relative to
// this pool.
std::vector<PsiResult> pool_zscore(std::span<const ComponentScores> scores, PsiWeights weights = {});

}  // namespace psi
