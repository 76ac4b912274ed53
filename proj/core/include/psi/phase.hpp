#pragma once

#include <complex>
#include <span>
#include <vector>

namespace psi {

// Band edges in cycles per token; the token sampling rate is 1.
struct BandpassSpec {
  double low_cut = 0.05;
  double high_cut = 0.15;
  int order = 3;  // lowpass prototype order; the bandpass has 2 * order poles
  double sample_rate = 1.0;

  void validate() const;
  double centre() const;  // geometric band centre

  friend bool operator==(const BandpassSpec&, const BandpassSpec&) = default;
};

// Candidate bands for band-sensitivity checks, default band included.
std::vector<BandpassSpec> alternate_bands();

struct IirCoefficients {
  std::vector<double> b;  // numerator, length 2 * order + 1
  std::vector<double> a;  // denominator, a[0] == 1
};

// Butterworth bandpass: analog prototype, lowpass-to-bandpass transform, and
// bilinear discretisation with both band edges prewarped.
IirCoefficients design_butterworth_bandpass(const BandpassSpec& spec);

// Roots of the denominator polynomial.
std::vector<std::complex<double>> filter_poles(const IirCoefficients& coeffs);

// H(e^{j 2 pi f}) for f in cycles per sample.
std::complex<double> frequency_response(const IirCoefficients& coeffs, double frequency);

// Direct-form II transposed filter with an optional initial state.
std::vector<double> lfilter(const IirCoefficients& coeffs, std::span<const double> signal,
                            std::span<const double> initial_state = {});

// Steady-state initial state for a unit step input.
std::vector<double> lfilter_zi(const IirCoefficients& coeffs);

// Number of samples reflected at each end by filtfilt: 3 * number of taps.
std::size_t filtfilt_padding(const IirCoefficients& coeffs);

// Zero-phase forward-backward filtering with odd-reflection padding and
// step-response initial conditions at both passes. The result is the mean of
// the forward-backward and backward-forward passes, so filtering commutes with
// time reversal.
std::vector<double> filtfilt(const IirCoefficients& coeffs, std::span<const double> signal);

// Analytic signal by the one-sided spectrum method.
std::vector<std::complex<double>> analytic_signal(std::span<const double> signal);

// Instantaneous phase of the analytic signal, in (-pi, pi].
std::vector<double> analytic_phase(std::span<const double> signal);

}  // namespace psi
