#include "psi/synth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>

#include "fft.hpp"
#include "psi/error.hpp"
#include "psi/parallel.hpp"
#include "psi/rng.hpp"

namespace psi {

double fgn_autocovariance(double hurst, std::size_t k) {
  const double two_h = 2.0 * hurst;
  const auto kd = static_cast<double>(k);
  return 0.5 * (std::pow(kd + 1.0, two_h) - 2.0 * std::pow(kd, two_h) + std::pow(std::abs(kd - 1.0), two_h));
}

std::vector<double> gen_fgn(double hurst, std::size_t t, std::uint64_t seed) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw Error(ErrorKind::config, fmt::format("Hurst exponent {} outside (0, 1)", hurst));
  if (t < 2) throw Error(ErrorKind::config, "fGn needs at least two samples");

  // First row of the circulant: gamma(0..t), then gamma(t-1..1).
  const std::size_t m = 2 * t;
  std::vector<std::complex<double>> row(m);
  for (std::size_t k = 0; k <= t; ++k) row[k] = fgn_autocovariance(hurst, k);
  for (std::size_t k = t + 1; k < m; ++k) row[k] = row[m - k];

  const auto eigen = detail::fft(row);
  double largest = 0.0;
  for (const auto& e : eigen) largest = std::max(largest, std::abs(e.real()));

  Rng rng(seed);
  std::vector<std::complex<double>> weighted(m);
  for (std::size_t k = 0; k < m; ++k) {
    double lambda = eigen[k].real();
    if (lambda < 0.0) {
      if (lambda < -1e-10 * largest)
        throw Error(ErrorKind::numeric, fmt::format("circulant embedding has negative eigenvalue {}", lambda));
      lambda = 0.0;
    }
    const double re = rng.normal();
    const double im = rng.normal();
    weighted[k] = std::sqrt(lambda / static_cast<double>(m)) * std::complex<double>(re, im);
  }
  const auto mixed = detail::fft(weighted);
  std::vector<double> out(t);
  for (std::size_t i = 0; i < t; ++i) out[i] = mixed[i].real();
  return out;
}

std::vector<double> gen_white(std::size_t t, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(t);
  for (auto& v : out) v = rng.normal();
  return out;
}

std::vector<double> gen_random_walk(std::size_t t, std::uint64_t seed) {
  auto out = gen_white(t, seed);
  for (std::size_t i = 1; i < t; ++i) out[i] += out[i - 1];
  return out;
}

std::vector<double> gen_periodic(int period, std::size_t t, std::uint64_t seed, double jitter) {
  if (period < 2) throw Error(ErrorKind::config, "period must be at least 2");
  if (jitter < 0.0) throw Error(ErrorKind::config, "jitter must be non-negative");
  Rng rng(seed);
  std::vector<double> pattern(static_cast<std::size_t>(period));
  for (auto& v : pattern) v = rng.normal();
  std::vector<double> out(t);
  for (std::size_t i = 0; i < t; ++i) out[i] = pattern[i % pattern.size()] + jitter * rng.normal();
  return out;
}

double kuramoto_critical_coupling(double freq_spread) { return std::sqrt(8.0 / std::numbers::pi) * freq_spread; }

KuramotoRun gen_kuramoto(std::size_t c, double coupling, double freq_spread, std::size_t t, std::uint64_t seed,
                         std::size_t burn_in) {
  if (c < 2) throw Error(ErrorKind::config, "Kuramoto network needs at least two oscillators");
  if (coupling < 0.0) throw Error(ErrorKind::config, "coupling must be non-negative");
  if (freq_spread < 0.0) throw Error(ErrorKind::config, "frequency spread must be non-negative");

  Rng rng(seed);
  std::vector<double> omega(c), theta(c);
  for (auto& w : omega) w = kBandCentreAngular + freq_spread * rng.normal();
  for (auto& p : theta) p = rng.uniform(-std::numbers::pi, std::numbers::pi);

  KuramotoRun run{Matrix(t, c), Matrix(t, c)};
  const auto n = static_cast<double>(c);
  auto step = [&] {
    // (K / c) sum_j sin(theta_j - theta_i) = K Im(Z exp(-i theta_i)), Z the mean phasor.
    double zr = 0.0, zi = 0.0;
    for (double p : theta) {
      zr += std::cos(p);
      zi += std::sin(p);
    }
    zr /= n;
    zi /= n;
    for (std::size_t i = 0; i < c; ++i) {
      const double pull = zi * std::cos(theta[i]) - zr * std::sin(theta[i]);
      theta[i] = std::remainder(theta[i] + omega[i] + coupling * pull, 2.0 * std::numbers::pi);
    }
  };

  for (std::size_t s = 0; s < burn_in; ++s) step();
  for (std::size_t r = 0; r < t; ++r) {
    for (std::size_t i = 0; i < c; ++i) {
      double p = theta[i];
      if (p <= -std::numbers::pi) p = std::numbers::pi;
      run.phases(r, i) = p;
      run.signals(r, i) = std::cos(p);
    }
    step();
  }
  return run;
}

namespace {

GenerationParams generation_params_for(const Condition& c) {
  switch (c.kind()) {
    case ConditionKind::intact_repetition: return {0.7, 50};
    case ConditionKind::intact_noisy: return {2.5, 200};
    default: return {1.0, 50};
  }
}

constexpr std::uint64_t kOscillatorStream = 1'000'000;

}  // namespace

ActivationTrial gen_condition_analogue(const Condition& analogue, std::size_t t, std::size_t c, std::uint64_t seed,
                                       const AnalogueParams& params) {
  ActivationTrial trial;
  trial.condition = analogue;
  trial.seed = seed;
  trial.generation_params = generation_params_for(analogue);
  trial.data = Matrix(t, c);

  const double k_complex = params.near_critical_factor * kuramoto_critical_coupling(params.freq_spread);
  auto complex_with_coupling = [&](double coupling) {
    const auto osc = gen_kuramoto(c, coupling, params.freq_spread, t, derive_seed(seed, kOscillatorStream));
    for (std::size_t ch = 0; ch < c; ++ch) {
      const auto noise = gen_fgn(params.complex_hurst, t, derive_seed(seed, ch));
      for (std::size_t r = 0; r < t; ++r)
        trial.data(r, ch) = params.fgn_weight * noise[r] + params.oscillator_weight * osc.signals(r, ch);
    }
  };

  switch (analogue.kind()) {
    case ConditionKind::intact_complex:
      complex_with_coupling(k_complex);
      break;
    case ConditionKind::damaged_heads:
      complex_with_coupling(k_complex * params.damaged_heads_factor);
      break;
    case ConditionKind::damaged_noise:
      complex_with_coupling(k_complex * params.damaged_noise_factor);
      break;
    case ConditionKind::intact_repetition:
      for (std::size_t ch = 0; ch < c; ++ch)
        trial.data.set_column(ch, gen_periodic(params.repetition_period, t, derive_seed(seed, ch), params.repetition_jitter));
      break;
    case ConditionKind::intact_noisy: {
      const auto osc = gen_kuramoto(c, 0.0, params.freq_spread, t, derive_seed(seed, kOscillatorStream));
      for (std::size_t ch = 0; ch < c; ++ch) {
        const auto noise = gen_white(t, derive_seed(seed, ch));
        for (std::size_t r = 0; r < t; ++r)
          trial.data(r, ch) = noise[r] + params.noisy_oscillator_weight * osc.signals(r, ch);
      }
      break;
    }
    case ConditionKind::custom:
      throw Error(ErrorKind::config, fmt::format("no synthetic analogue for custom condition '{}'", analogue.name()));
  }

  trial.channel_indices.resize(c);
  for (std::size_t ch = 0; ch < c; ++ch) trial.channel_indices[ch] = static_cast<int>(ch);
  return trial;
}

SynthKind parse_synth_kind(const std::string& name) {
  if (name == "fgn") return SynthKind::fgn;
  if (name == "random_walk" || name == "random-walk") return SynthKind::random_walk;
  if (name == "white") return SynthKind::white;
  if (name == "periodic") return SynthKind::periodic;
  if (name == "kuramoto" || name == "kuramoto_net") return SynthKind::kuramoto_net;
  if (name == "condition_analogue" || name == "analogue") return SynthKind::condition_analogue;
  throw Error(ErrorKind::config, fmt::format("unknown synthetic kind '{}'", name));
}

void SynthSpec::validate() const {
  if (t < 32) throw Error(ErrorKind::config, fmt::format("t = {} is below the minimum of 32", t));
  if (c < 2) throw Error(ErrorKind::config, "c must be at least 2");
  if (kind == SynthKind::fgn && !(hurst > 0.0 && hurst < 1.0))
    throw Error(ErrorKind::config, fmt::format("Hurst exponent {} outside (0, 1)", hurst));
  if (kind == SynthKind::kuramoto_net && c < 8) throw Error(ErrorKind::config, "Kuramoto networks need c >= 8");
  if (kind == SynthKind::kuramoto_net && coupling < 0.0) throw Error(ErrorKind::config, "coupling must be non-negative");
  if (freq_spread < 0.0) throw Error(ErrorKind::config, "frequency spread must be non-negative");
  if (kind == SynthKind::periodic && period < 2) throw Error(ErrorKind::config, "period must be at least 2");
  if (kind == SynthKind::condition_analogue && analogue.is_custom())
    throw Error(ErrorKind::config, "analogue must be one of the five named conditions");
}

ActivationTrial generate_trial(const SynthSpec& spec, const std::string& trial_id) {
  spec.validate();
  ActivationTrial trial;
  if (spec.kind == SynthKind::condition_analogue) {
    trial = gen_condition_analogue(spec.analogue, spec.t, spec.c, spec.seed);
  } else {
    trial.condition = Condition::custom(
        spec.kind == SynthKind::fgn ? fmt::format("fgn_h{}", spec.hurst)
        : spec.kind == SynthKind::random_walk ? std::string("random_walk")
        : spec.kind == SynthKind::white ? std::string("white")
        : spec.kind == SynthKind::periodic ? fmt::format("periodic_p{}", spec.period)
                                            : fmt::format("kuramoto_k{}", spec.coupling));
    trial.seed = spec.seed;
    trial.data = Matrix(spec.t, spec.c);
    if (spec.kind == SynthKind::kuramoto_net) {
      trial.data = gen_kuramoto(spec.c, spec.coupling, spec.freq_spread, spec.t, spec.seed).signals;
    } else {
      for (std::size_t ch = 0; ch < spec.c; ++ch) {
        const auto s = derive_seed(spec.seed, ch);
        switch (spec.kind) {
          case SynthKind::fgn: trial.data.set_column(ch, gen_fgn(spec.hurst, spec.t, s)); break;
          case SynthKind::random_walk: trial.data.set_column(ch, gen_random_walk(spec.t, s)); break;
          case SynthKind::white: trial.data.set_column(ch, gen_white(spec.t, s)); break;
          case SynthKind::periodic: trial.data.set_column(ch, gen_periodic(spec.period, spec.t, s, spec.jitter)); break;
          default: break;
        }
      }
    }
    trial.channel_indices.resize(spec.c);
    for (std::size_t ch = 0; ch < spec.c; ++ch) trial.channel_indices[ch] = static_cast<int>(ch);
  }
  trial.trial_id = trial_id;
  return trial;
}

void assign_channel_layout(ActivationTrial& trial, std::uint64_t channel_seed) {
  constexpr std::size_t kBlocks = 4;
  constexpr int kHidden = 1024;
  const auto c = trial.channels();
  if (c % kBlocks != 0 || c / kBlocks > static_cast<std::size_t>(kHidden)) {
    trial.block_ids.clear();
    return;
  }
  trial.block_ids = {1, 4, 7, 10};
  const auto per_block = c / kBlocks;
  trial.channel_indices.clear();
  for (std::size_t b = 0; b < kBlocks; ++b) {
    Rng rng(derive_seed(channel_seed, b));
    std::set<int> chosen;
    while (chosen.size() < per_block) chosen.insert(static_cast<int>(rng.next() % kHidden));
    trial.channel_indices.insert(trial.channel_indices.end(), chosen.begin(), chosen.end());
  }
}

std::vector<ActivationTrial> make_battery(std::size_t trials_per_condition, std::uint64_t seed, std::size_t t,
                                          std::size_t c, const AnalogueParams& params, int threads) {
  const auto& conditions = standard_conditions();
  std::vector<ActivationTrial> trials(conditions.size() * trials_per_condition);
  parallel_for(trials.size(), threads, [&](std::size_t i) {
    const auto j = i / trials_per_condition;
    const auto k = i % trials_per_condition;
    auto trial = gen_condition_analogue(conditions[j], t, c, derive_seed(seed, j * 1000 + k), params);
    trial.trial_id = fmt::format("{}_{:02d}", conditions[j].name(), k);
    assign_channel_layout(trial, seed);
    trials[i] = std::move(trial);
  });
  return trials;
}

TrialManifest write_trials(const std::vector<ActivationTrial>& trials, const std::filesystem::path& dir,
                           std::uint64_t channel_seed, const std::string& notes, TrialFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, fmt::format("cannot create {}: {}", dir.string(), ec.message()));

  TrialManifest manifest;
  manifest.channel_seed = channel_seed;
  manifest.notes = notes;
  manifest.base_dir = dir;
  if (!trials.empty()) {
    manifest.blocks = trials.front().block_ids;
    manifest.per_block_channels =
        manifest.blocks.empty() ? 0 : static_cast<int>(trials.front().channels() / manifest.blocks.size());
  }
  for (const auto& trial : trials) {
    const auto name = trial.trial_id + (format == TrialFormat::binary ? ".psia" : ".csv");
    save_trial(trial, dir / name, format);
    manifest.trials.push_back({name, trial.condition});
  }
  save_manifest(manifest, dir / "manifest.json");
  return manifest;
}

}  // namespace psi
