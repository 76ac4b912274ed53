#pragma once

#include <span>
#include <vector>

#include "psi/matrix.hpp"
#include "psi/phase.hpp"
#include "psi/trial.hpp"

namespace psi {

struct SyncSeries {
  std::vector<double> r;  // Kuramoto order parameter per time step, in [0, 1]
  double m = 0.0;         // population standard deviation of r
};

// Magnitude of the mean unit phasor over channels.
double kuramoto_r(std::span<const double> phases);

// R(t) from a T x C phase matrix; m excludes `trim` samples at each end.
SyncSeries sync_from_phases(const Matrix& phases, std::size_t trim = 0);

// Band-limited instantaneous phase of every column (filtfilt then Hilbert).
Matrix band_phases(const Matrix& data, const BandpassSpec& band, int threads = 1);

// Metastability of a preprocessed trial. R(t) is reported for all T samples;
// trim only restricts the samples entering m.
SyncSeries metastability_trial(const PreprocessedTrial& trial, const BandpassSpec& band,
                               std::size_t trim = 0, int threads = 1);

double population_sd(std::span<const double> values);

}  // namespace psi
