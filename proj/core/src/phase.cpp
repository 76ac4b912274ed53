#include "psi/phase.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "psi/error.hpp"

namespace psi {
namespace {

using cd = std::complex<double>;

std::vector<cd> expand_roots(std::span<const cd> roots) {
  std::vector<cd> poly{1.0};
  for (const auto& r : roots) {
    poly.push_back(0.0);
    for (std::size_t i = poly.size() - 1; i > 0; --i) poly[i] -= r * poly[i - 1];
  }
  return poly;
}

}  // namespace

void BandpassSpec::validate() const {
  if (!(sample_rate > 0.0)) throw Error(ErrorKind::config, "sample rate must be positive");
  const double nyquist = sample_rate / 2.0;
  if (!(low_cut > 0.0 && low_cut < high_cut && high_cut < nyquist))
    throw Error(ErrorKind::config,
                fmt::format("band {}-{} must satisfy 0 < low < high < {}", low_cut, high_cut, nyquist));
  if (order < 1) throw Error(ErrorKind::config, "filter order must be at least 1");
}

double BandpassSpec::centre() const { return std::sqrt(low_cut * high_cut); }

std::vector<BandpassSpec> alternate_bands() {
  return {{0.03, 0.10, 3, 1.0}, {0.05, 0.15, 3, 1.0}, {0.10, 0.25, 3, 1.0}};
}

IirCoefficients design_butterworth_bandpass(const BandpassSpec& spec) {
  spec.validate();
  if (spec.high_cut / spec.low_cut < 1.01)
    throw Error(ErrorKind::design, fmt::format("band {}-{} is too narrow to design stably", spec.low_cut, spec.high_cut));

  const int n = spec.order;
  const double fs2 = 2.0 * spec.sample_rate;
  const double w1 = fs2 * std::tan(std::numbers::pi * spec.low_cut / spec.sample_rate);
  const double w2 = fs2 * std::tan(std::numbers::pi * spec.high_cut / spec.sample_rate);
  const double bw = w2 - w1;
  const double w0 = std::sqrt(w1 * w2);

  // Analog bandpass: n zeros at the origin, two poles per prototype pole.
  std::vector<cd> poles;
  for (int k = 1; k <= n; ++k) {
    const cd p = std::polar(1.0, std::numbers::pi * (2.0 * k + n - 1.0) / (2.0 * n));
    const cd half = p * bw / 2.0;
    const cd disc = std::sqrt(half * half - w0 * w0);
    poles.push_back(half + disc);
    poles.push_back(half - disc);
  }
  double gain = std::pow(bw, n);

  // Bilinear map. Origin zeros go to z = 1, the n zeros at infinity to z = -1.
  std::vector<cd> zd(static_cast<std::size_t>(n), 1.0);
  zd.insert(zd.end(), static_cast<std::size_t>(n), -1.0);
  std::vector<cd> pd;
  cd num = 1.0, den = 1.0;
  for (int k = 0; k < n; ++k) num *= fs2;  // prod(fs2 - 0)
  for (const auto& p : poles) {
    pd.push_back((fs2 + p) / (fs2 - p));
    den *= fs2 - p;
  }
  gain *= (num / den).real();

  for (const auto& p : pd)
    if (std::abs(p) >= 1.0) throw Error(ErrorKind::design, "designed filter is unstable");

  IirCoefficients out;
  for (const auto& c : expand_roots(zd)) out.b.push_back(gain * c.real());
  for (const auto& c : expand_roots(pd)) out.a.push_back(c.real());
  return out;
}

std::vector<std::complex<double>> filter_poles(const IirCoefficients& coeffs) {
  const auto order = coeffs.a.size() - 1;
  if (order == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(order), static_cast<Eigen::Index>(order));
  for (std::size_t j = 0; j < order; ++j) companion(0, static_cast<Eigen::Index>(j)) = -coeffs.a[j + 1] / coeffs.a[0];
  for (std::size_t i = 1; i < order; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<cd> out;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) out.push_back(solver.eigenvalues()[i]);
  return out;
}

std::complex<double> frequency_response(const IirCoefficients& coeffs, double frequency) {
  const cd zinv = std::polar(1.0, -2.0 * std::numbers::pi * frequency);
  cd num = 0.0, den = 0.0, zk = 1.0;
  for (std::size_t k = 0; k < std::max(coeffs.b.size(), coeffs.a.size()); ++k) {
    if (k < coeffs.b.size()) num += coeffs.b[k] * zk;
    if (k < coeffs.a.size()) den += coeffs.a[k] * zk;
    zk *= zinv;
  }
  return num / den;
}

std::vector<double> lfilter(const IirCoefficients& coeffs, std::span<const double> signal,
                            std::span<const double> initial_state) {
  const auto taps = std::max(coeffs.a.size(), coeffs.b.size());
  std::vector<double> b(taps, 0.0), a(taps, 0.0);
  std::copy(coeffs.b.begin(), coeffs.b.end(), b.begin());
  std::copy(coeffs.a.begin(), coeffs.a.end(), a.begin());
  const double a0 = a[0];
  for (auto& v : b) v /= a0;
  for (auto& v : a) v /= a0;

  std::vector<double> state(taps - 1, 0.0);
  if (!initial_state.empty()) std::copy(initial_state.begin(), initial_state.end(), state.begin());

  std::vector<double> out(signal.size());
  for (std::size_t n = 0; n < signal.size(); ++n) {
    const double x = signal[n];
    const double y = b[0] * x + (state.empty() ? 0.0 : state[0]);
    for (std::size_t k = 0; k + 1 < state.size(); ++k) state[k] = state[k + 1] + b[k + 1] * x - a[k + 1] * y;
    if (!state.empty()) state.back() = b[taps - 1] * x - a[taps - 1] * y;
    out[n] = y;
  }
  return out;
}

std::vector<double> lfilter_zi(const IirCoefficients& coeffs) {
  const auto taps = std::max(coeffs.a.size(), coeffs.b.size());
  const auto m = static_cast<Eigen::Index>(taps - 1);
  std::vector<double> b(taps, 0.0), a(taps, 0.0);
  std::copy(coeffs.b.begin(), coeffs.b.end(), b.begin());
  std::copy(coeffs.a.begin(), coeffs.a.end(), a.begin());
  const double a0 = a[0];
  for (auto& v : b) v /= a0;
  for (auto& v : a) v /= a0;

  // (I - A^T) zi = b[1:] - a[1:] b[0], A the companion matrix of a.
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    lhs(i, 0) += a[static_cast<std::size_t>(i) + 1];
    if (i + 1 < m) lhs(i, i + 1) -= 1.0;
    rhs(i) = b[static_cast<std::size_t>(i) + 1] - a[static_cast<std::size_t>(i) + 1] * b[0];
  }
  const Eigen::VectorXd zi = lhs.partialPivLu().solve(rhs);
  return {zi.data(), zi.data() + zi.size()};
}

std::size_t filtfilt_padding(const IirCoefficients& coeffs) {
  return 3 * std::max(coeffs.a.size(), coeffs.b.size());
}

namespace {

// One forward-then-backward pass over the odd-reflected extension.
std::vector<double> forward_backward(const IirCoefficients& coeffs, std::span<const double> signal,
                                     std::span<const double> zi, std::size_t pad) {
  const auto n = signal.size();
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * signal[0] - signal[i]);
  ext.insert(ext.end(), signal.begin(), signal.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * signal[n - 1] - signal[n - 1 - i]);

  std::vector<double> state(zi.size());

  for (std::size_t k = 0; k < zi.size(); ++k) state[k] = zi[k] * ext.front();
  auto forward = lfilter(coeffs, ext, state);

  std::reverse(forward.begin(), forward.end());
  for (std::size_t k = 0; k < zi.size(); ++k) state[k] = zi[k] * forward.front();
  auto backward = lfilter(coeffs, forward, state);
  std::reverse(backward.begin(), backward.end());

  return {backward.begin() + static_cast<std::ptrdiff_t>(pad), backward.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace

std::vector<double> filtfilt(const IirCoefficients& coeffs, std::span<const double> signal) {
  const auto pad = filtfilt_padding(coeffs);
  const auto n = signal.size();
  if (n <= pad)
    throw Error(ErrorKind::length, fmt::format("filtfilt needs more than {} samples, got {}", pad, n));

  // Forward-backward and backward-forward differ only in their edge
  // transients; the average is exactly symmetric under time reversal.
  const auto zi = lfilter_zi(coeffs);
  auto out = forward_backward(coeffs, signal, zi, pad);
  std::vector<double> reversed(signal.rbegin(), signal.rend());
  const auto mirrored = forward_backward(coeffs, reversed, zi, pad);
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * (out[i] + mirrored[n - 1 - i]);
  return out;
}

std::vector<std::complex<double>> analytic_signal(std::span<const double> signal) {
  const auto n = signal.size();
  if (n < 8) throw Error(ErrorKind::length, fmt::format("analytic signal needs at least 8 samples, got {}", n));
  if (std::all_of(signal.begin(), signal.end(), [](double v) { return v == 0.0; }))
    throw Error(ErrorKind::degenerate, "phase is undefined for an all-zero signal");

  std::vector<cd> spectrum(signal.begin(), signal.end());
  spectrum = detail::fft(spectrum);
  // DC (and Nyquist for even n) keep unit weight; positive bins double.
  const std::size_t positive_end = (n % 2 == 0) ? n / 2 : (n + 1) / 2;
  for (std::size_t k = 1; k < positive_end; ++k) spectrum[k] *= 2.0;
  for (std::size_t k = (n % 2 == 0) ? n / 2 + 1 : positive_end; k < n; ++k) spectrum[k] = 0.0;
  return detail::ifft(spectrum);
}

std::vector<double> analytic_phase(std::span<const double> signal) {
  const auto z = analytic_signal(signal);
  std::vector<double> phase(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    double p = std::arg(z[i]);
    if (p <= -std::numbers::pi) p = std::numbers::pi;
    phase[i] = p;
  }
  return phase;
}

}  // namespace psi
