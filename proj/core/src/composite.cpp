#include "psi/composite.hpp"

#include <fmt/format.h>

#include <cmath>

#include "psi/error.hpp"

namespace psi {

PsiWeights psi_weights_override(double w_h, double w_m) {
  if (!(w_h >= 0.0 && w_m >= 0.0))
    throw Error(ErrorKind::config, fmt::format("weights must be non-negative, got ({}, {})", w_h, w_m));
  if (std::abs(w_h + w_m - 1.0) > 1e-12)
    throw Error(ErrorKind::config, fmt::format("weights must sum to 1, got {} + {}", w_h, w_m));
  return {w_h, w_m};
}

namespace {

struct Moments {
  double mean;
  double sd;
};

template <typename Get>
Moments pooled(std::span<const ComponentScores> scores, Get get) {
  const auto n = static_cast<double>(scores.size());
  double mean = 0.0;
  for (const auto& s : scores) mean += get(s);
  mean /= n;
  double ss = 0.0;
  for (const auto& s : scores) ss += (get(s) - mean) * (get(s) - mean);
  return {mean, std::sqrt(ss / n)};
}

}  // namespace

std::vector<PsiResult> pool_zscore(std::span<const ComponentScores> scores, PsiWeights weights) {
  weights = psi_weights_override(weights.w_h, weights.w_m);
  if (scores.size() < 2) throw Error(ErrorKind::arity, "pooled z-scoring needs at least two trials");

  const auto h = pooled(scores, [](const ComponentScores& s) { return s.h_eff; });
  const auto m = pooled(scores, [](const ComponentScores& s) { return s.m; });
  if (!(h.sd > kDegeneratePoolSd) || !(m.sd > kDegeneratePoolSd))
    throw Error(ErrorKind::degenerate,
                fmt::format("pool of {} trials has zero spread (sd h_eff = {:.3g}, sd m = {:.3g})", scores.size(), h.sd, m.sd));

  std::vector<PsiResult> out;
  out.reserve(scores.size());
  for (const auto& s : scores) {
    PsiResult r{s.trial_id, s.condition, (s.h_eff - h.mean) / h.sd, (s.m - m.mean) / m.sd, 0.0};
    r.psi = weights.w_h * r.h_z + weights.w_m * r.m_z;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace psi
