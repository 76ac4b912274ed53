#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "psi/manifest.hpp"
#include "psi/matrix.hpp"
#include "psi/trial.hpp"

namespace psi {

// Exact fractional Gaussian noise (Davies-Harte circulant embedding of size
// 2t), unit marginal variance.
std::vector<double> gen_fgn(double hurst, std::size_t t, std::uint64_t seed);

// Autocovariance of unit-variance fGn at integer lag k.
double fgn_autocovariance(double hurst, std::size_t k);

std::vector<double> gen_white(std::size_t t, std::uint64_t seed);
std::vector<double> gen_random_walk(std::size_t t, std::uint64_t seed);

// A random pattern of the given period repeated to length t, plus Gaussian
// jitter of standard deviation `jitter`.
std::vector<double> gen_periodic(int period, std::size_t t, std::uint64_t seed, double jitter);

inline constexpr double kBandCentreAngular = 0.6283185307179586;  // 2 pi * 0.1 rad/token
inline constexpr double kDefaultFreqSpread = 0.1;                 // rad/token
inline constexpr std::size_t kDefaultKuramotoBurnIn = 512;

struct KuramotoRun {
  Matrix phases;   // t x c, wrapped to (-pi, pi]
  Matrix signals;  // cos(phases)
};

// All-to-all Kuramoto network, forward Euler with a step of one token.
// Natural frequencies are Gaussian around the band centre; initial phases are
// uniform. `burn_in` steps are simulated and discarded before recording.
KuramotoRun gen_kuramoto(std::size_t c, double coupling, double freq_spread, std::size_t t, std::uint64_t seed,
                         std::size_t burn_in = kDefaultKuramotoBurnIn);

// Mean-field onset of synchrony for Gaussian frequencies: sqrt(8 / pi) * spread.
double kuramoto_critical_coupling(double freq_spread);

// Knobs of the synthetic condition analogues.
struct AnalogueParams {
  double complex_hurst = 0.72;
  double fgn_weight = 1.0;
  double oscillator_weight = 1.0;
  double freq_spread = kDefaultFreqSpread;
  double near_critical_factor = 0.8;    // coupling of intact_complex in units of K_c
  double damaged_heads_factor = 0.4;    // coupling multipliers relative to intact_complex
  double damaged_noise_factor = 0.7;
  int repetition_period = 8;
  double repetition_jitter = 0.05;
  double noisy_oscillator_weight = 0.0;
};

ActivationTrial gen_condition_analogue(const Condition& analogue, std::size_t t, std::size_t c, std::uint64_t seed,
                                       const AnalogueParams& params = {});

enum class SynthKind { fgn, random_walk, white, periodic, kuramoto_net, condition_analogue };

SynthKind parse_synth_kind(const std::string& name);

struct SynthSpec {
  SynthKind kind = SynthKind::fgn;
  double hurst = 0.7;
  double coupling = 0.0;
  double freq_spread = kDefaultFreqSpread;
  int period = 8;
  double jitter = 0.05;
  Condition analogue;
  std::size_t t = 256;
  std::size_t c = 128;
  std::uint64_t seed = 0;

  void validate() const;
};

// One trial; each channel draws from its own derived stream of spec.seed.
ActivationTrial generate_trial(const SynthSpec& spec, const std::string& trial_id);

// Block ids {1,4,7,10} with sorted distinct hidden-state indices per block
// drawn from [0, 1024) by channel_seed, when c splits evenly over four blocks.
void assign_channel_layout(ActivationTrial& trial, std::uint64_t channel_seed);

// Five analogues x trials_per_condition, trial k of condition j seeded from
// derive_seed(seed, j * 1000 + k).
std::vector<ActivationTrial> make_battery(std::size_t trials_per_condition, std::uint64_t seed, std::size_t t = 256,
                                          std::size_t c = 128, const AnalogueParams& params = {}, int threads = 1);

// Writes trials as <dir>/<trial_id>.psia plus <dir>/manifest.json.
TrialManifest write_trials(const std::vector<ActivationTrial>& trials, const std::filesystem::path& dir,
                           std::uint64_t channel_seed, const std::string& notes,
                           TrialFormat format = TrialFormat::binary);

}  // namespace psi
