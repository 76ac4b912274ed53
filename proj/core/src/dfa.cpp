#include "psi/dfa.hpp"

#include <fmt/format.h>

#include <cmath>

#include "psi/error.hpp"
#include "psi/parallel.hpp"

namespace psi {

void DfaConfig::validate(std::size_t steps) const {
  if (window_sizes.empty()) throw Error(ErrorKind::config, "DFA needs at least one window size");
  if (window_sizes.size() < 2) throw Error(ErrorKind::config, "DFA needs at least two window sizes for a slope");
  for (std::size_t i = 0; i < window_sizes.size(); ++i) {
    const int s = window_sizes[i];
    if (s < 4) throw Error(ErrorKind::config, fmt::format("DFA window {} is below the minimum of 4", s));
    if (i > 0 && s <= window_sizes[i - 1]) throw Error(ErrorKind::config, "DFA window sizes must be strictly increasing");
    if (static_cast<std::size_t>(s) * 2 > steps)
      throw Error(ErrorKind::config, fmt::format("DFA window {} leaves fewer than two windows in {} steps", s, steps));
  }
  if (!(sigma_h > 0.0)) throw Error(ErrorKind::config, "sigma_h must be positive");
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

ChannelDfa dfa_channel(std::span<const double> signal, const DfaConfig& config) {
  const auto steps = signal.size();
  config.validate(steps);

  double mean = 0.0;
  for (double v : signal) mean += v;
  mean /= static_cast<double>(steps);

  std::vector<double> profile(steps);
  double acc = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    acc += signal[t] - mean;
    profile[t] = acc;
  }

  ChannelDfa out;
  std::vector<double> log_s, log_f;
  for (int s : config.window_sizes) {
    const auto len = static_cast<std::size_t>(s);
    const auto windows = steps / len;

    // Local time index 0..s-1 is the same in every window.
    const double xm = (static_cast<double>(s) - 1.0) / 2.0;
    double sxx = 0.0;
    for (std::size_t k = 0; k < len; ++k) sxx += (static_cast<double>(k) - xm) * (static_cast<double>(k) - xm);

    double acc = 0.0;
    for (std::size_t w = 0; w < windows; ++w) {
      const auto seg = std::span<const double>(profile).subspan(w * len, len);
      double ym = 0.0;
      for (double v : seg) ym += v;
      ym /= static_cast<double>(s);
      double sxy = 0.0;
      for (std::size_t k = 0; k < len; ++k) sxy += (static_cast<double>(k) - xm) * (seg[k] - ym);
      const double slope = sxy / sxx;
      double ss = 0.0;
      for (std::size_t k = 0; k < len; ++k) {
        const double r = seg[k] - (ym + slope * (static_cast<double>(k) - xm));
        ss += r * r;
      }
      const double mean_square = ss / static_cast<double>(s);
      acc += config.average == FluctuationAverage::pooled_rms ? mean_square : std::sqrt(mean_square);
    }
    const double per_window = acc / static_cast<double>(windows);
    const double f = config.average == FluctuationAverage::pooled_rms ? std::sqrt(per_window) : per_window;
    if (!(f > 0.0) || !std::isfinite(f))
      throw Error(ErrorKind::degenerate, fmt::format("F({}) = 0: cumulative signal is linear in every window", s));
    out.fluctuations.emplace_back(s, f);
    log_s.push_back(std::log(static_cast<double>(s)));
    log_f.push_back(std::log(f));
  }
  out.h = ols_slope(log_s, log_f);
  return out;
}

DfaResult dfa_trial(const PreprocessedTrial& trial, const DfaConfig& config, int threads) {
  config.validate(trial.steps());
  const auto channels = trial.channels();
  const auto scales = config.window_sizes.size();

  std::vector<ChannelDfa> per_channel(channels);
  parallel_for(channels, threads, [&](std::size_t c) {
    try {
      per_channel[c] = dfa_channel(trial.data().column(c), config);
    } catch (const Error& e) {
      throw e.with_channel(c);
    }
  });

  DfaResult result;
  result.fluctuation_table = Matrix(channels, scales);
  result.per_channel_h.resize(channels);
  double sum = 0.0;
  for (std::size_t c = 0; c < channels; ++c) {
    result.per_channel_h[c] = per_channel[c].h;
    sum += per_channel[c].h;
    for (std::size_t k = 0; k < scales; ++k) result.fluctuation_table(c, k) = per_channel[c].fluctuations[k].second;
  }
  result.h_raw = sum / static_cast<double>(channels);
  result.h_eff = gaussian_tuning(result.h_raw, config.h_opt, config.sigma_h);
  return result;
}

double gaussian_tuning(double h_raw, double h_opt, double sigma_h) {
  if (!(sigma_h > 0.0)) throw Error(ErrorKind::config, "sigma_h must be positive");
  const double d = h_raw - h_opt;
  return std::exp(-(d * d) / (2.0 * sigma_h * sigma_h));
}

}  // namespace psi
