#include "psi/metastability.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "psi/error.hpp"
#include "psi/parallel.hpp"

namespace psi {

double kuramoto_r(std::span<const double> phases) {
  double re = 0.0, im = 0.0;
  for (double p : phases) {
    re += std::cos(p);
    im += std::sin(p);
  }
  const auto n = static_cast<double>(phases.size());
  return std::min(1.0, std::hypot(re / n, im / n));
}

double population_sd(std::span<const double> values) {
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / n);
}

SyncSeries sync_from_phases(const Matrix& phases, std::size_t trim) {
  if (phases.cols() < 2) throw Error(ErrorKind::arity, "Kuramoto order parameter needs at least two channels");
  if (2 * trim >= phases.rows())
    throw Error(ErrorKind::config, fmt::format("trim {} leaves no samples of {}", trim, phases.rows()));
  SyncSeries out;
  out.r.resize(phases.rows());
  for (std::size_t t = 0; t < phases.rows(); ++t) out.r[t] = kuramoto_r(phases.row(t));
  out.m = population_sd(std::span<const double>(out.r).subspan(trim, out.r.size() - 2 * trim));
  return out;
}

Matrix band_phases(const Matrix& data, const BandpassSpec& band, int threads) {
  const auto coeffs = design_butterworth_bandpass(band);
  Matrix phases(data.rows(), data.cols());
  parallel_for(data.cols(), threads, [&](std::size_t c) {
    try {
      const auto filtered = filtfilt(coeffs, data.column(c));
      phases.set_column(c, analytic_phase(filtered));
    } catch (const Error& e) {
      throw e.with_channel(c);
    }
  });
  return phases;
}

SyncSeries metastability_trial(const PreprocessedTrial& trial, const BandpassSpec& band, std::size_t trim,
                               int threads) {
  return sync_from_phases(band_phases(trial.data(), band, threads), trim);
}

}  // namespace psi
