#include <benchmark/benchmark.h>

#include "psi/dfa.hpp"
#include "psi/metastability.hpp"
#include "psi/phase.hpp"
#include "psi/pipeline.hpp"
#include "psi/synth.hpp"

using namespace psi;

static void BM_GenFgn(benchmark::State& state) {
  const auto t = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gen_fgn(0.7, t, seed++));
}
BENCHMARK(BM_GenFgn)->Arg(256)->Arg(1024)->Arg(4096);

static void BM_DfaChannel(benchmark::State& state) {
  const auto x = gen_fgn(0.7, static_cast<std::size_t>(state.range(0)), 1);
  const DfaConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(dfa_channel(x, cfg));
}
BENCHMARK(BM_DfaChannel)->Arg(256)->Arg(1024);

static void BM_Filtfilt(benchmark::State& state) {
  const auto x = gen_white(static_cast<std::size_t>(state.range(0)), 2);
  const auto coeffs = design_butterworth_bandpass(BandpassSpec{});
  for (auto _ : state) benchmark::DoNotOptimize(filtfilt(coeffs, x));
}
BENCHMARK(BM_Filtfilt)->Arg(256)->Arg(4096);

static void BM_AnalyticPhase(benchmark::State& state) {
  const auto x = gen_white(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(analytic_phase(x));
}
BENCHMARK(BM_AnalyticPhase)->Arg(256)->Arg(4096);

// one 256 x 128 trial, the default shape
static void BM_MetastabilityTrial(benchmark::State& state) {
  const auto trial = preprocess(gen_condition_analogue(ConditionKind::intact_complex, 256, 128, 4));
  for (auto _ : state) benchmark::DoNotOptimize(metastability_trial(trial, BandpassSpec{}));
}
BENCHMARK(BM_MetastabilityTrial)->Unit(benchmark::kMillisecond);

static void BM_RunPool(benchmark::State& state) {
  const auto trials = make_battery(static_cast<std::size_t>(state.range(0)), 5);
  RunConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(run_pool(trials, cfg));
}
BENCHMARK(BM_RunPool)->Arg(3)->Arg(15)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
