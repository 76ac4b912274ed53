#pragma once

#include <span>
#include <utility>
#include <vector>

#include "psi/matrix.hpp"
#include "psi/trial.hpp"

namespace psi {

// How per-window residuals combine into F(s).
enum class FluctuationAverage {
  pooled_rms,       // sqrt of the mean squared residual over all windows
  mean_window_rms,  // arithmetic mean of the per-window RMS values
};

struct DfaConfig {
  std::vector<int> window_sizes{4, 8, 16, 32};  // tokens
  double h_opt = 0.7;
  double sigma_h = 0.15;
  FluctuationAverage average = FluctuationAverage::pooled_rms;

  // Scales strictly increasing, each >= 4 and <= steps / 2; sigma_h > 0.
  void validate(std::size_t steps) const;
};

struct ChannelDfa {
  double h = 0.0;
  std::vector<std::pair<int, double>> fluctuations;  // (s, F(s))
};

struct DfaResult {
  std::vector<double> per_channel_h;
  double h_raw = 0.0;
  double h_eff = 0.0;
  Matrix fluctuation_table;  // channels x scales
};

// First-order DFA of one series. Integrates the demeaned signal, splits the
// profile into floor(T/s) non-overlapping windows (remainder dropped), removes
// a least-squares line per window, and combines the residuals across windows
// into F(s) per config.average. h is the OLS slope of ln F(s) against ln s.
ChannelDfa dfa_channel(std::span<const double> signal, const DfaConfig& config);

// dfa_channel on every column; h_raw is the channel mean, h_eff its Gaussian tuning.
DfaResult dfa_trial(const PreprocessedTrial& trial, const DfaConfig& config, int threads = 1);

// exp(-(h_raw - h_opt)^2 / (2 sigma_h^2))
double gaussian_tuning(double h_raw, double h_opt, double sigma_h);

// Slope of the ordinary least-squares line through (x, y).
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace psi
