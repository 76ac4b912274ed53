#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "psi/error.hpp"
#include "psi/manifest.hpp"
#include "psi/pipeline.hpp"
#include "psi/report.hpp"
#include "psi/rng.hpp"
#include "psi/robustness.hpp"
#include "psi/stats.hpp"
#include "psi/synth.hpp"

namespace psi::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunFlags {
  double band_low = 0.05;
  double band_high = 0.15;
  int filter_order = 3;
  std::string dfa_scales = "4,8,16,32";
  std::string dfa_average = "pooled";
  double h_opt = 0.7;
  double sigma_h = 0.15;
  std::string weights = "0.5,0.5";
  double q = 0.05;
  std::uint64_t seed = 0;
  int threads = 0;
  std::size_t trim = 0;
  std::string format;
  std::string out = ".";
};

std::vector<double> split_numbers(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::config, fmt::format("{}: cannot parse '{}'", what, item));
    }
  }
  return values;
}

RunConfig make_config(const RunFlags& f) {
  RunConfig c;
  c.band.low_cut = f.band_low;
  c.band.high_cut = f.band_high;
  c.band.order = f.filter_order;
  c.dfa.window_sizes.clear();
  for (double s : split_numbers(f.dfa_scales, "--dfa-scales")) {
    if (s != static_cast<int>(s)) throw Error(ErrorKind::config, "--dfa-scales takes integers");
    c.dfa.window_sizes.push_back(static_cast<int>(s));
  }
  if (f.dfa_average == "pooled") {
    c.dfa.average = FluctuationAverage::pooled_rms;
  } else if (f.dfa_average == "mean") {
    c.dfa.average = FluctuationAverage::mean_window_rms;
  } else {
    throw Error(ErrorKind::config, "--dfa-average must be pooled or mean");
  }
  c.dfa.h_opt = f.h_opt;
  c.dfa.sigma_h = f.sigma_h;
  const auto w = split_numbers(f.weights, "--weights");
  if (w.size() != 2) throw Error(ErrorKind::config, "--weights takes two values, w_h,w_m");
  c.weights = psi_weights_override(w[0], w[1]);
  c.q = f.q;
  c.seed = f.seed;
  c.threads = f.threads;
  c.trim = f.trim;
  c.output_dir = f.out;
  c.validate();
  return c;
}

std::string format_or(const RunFlags& f, const char* fallback) { return f.format.empty() ? fallback : f.format; }

fs::path out_dir(const RunFlags& f) {
  fs::path dir = f.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  return dir;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::format:
    case ErrorKind::corruption:
    case ErrorKind::io:
    case ErrorKind::metadata: return kExitFormat;
    case ErrorKind::data:
    case ErrorKind::degenerate:
    case ErrorKind::arity:
    case ErrorKind::length:
    case ErrorKind::numeric: return kExitDegenerate;
    case ErrorKind::config:
    case ErrorKind::design: return kExitUsage;
  }
  return kExitUsage;
}

void report_error(std::ostream& err, std::string_view kind, const std::string& message,
                  std::optional<std::size_t> channel = std::nullopt) {
  json j = {{"error", kind}, {"message", message}};
  if (channel) j["channel"] = *channel;
  err << j.dump() << "\n";
}

// analyze

struct AnalyzeArgs {
  std::string trial;
  std::string fluctuations;
  std::string sync;
};

void cmd_analyze(const AnalyzeArgs& a, const RunFlags& f, std::ostream& out) {
  const auto config = make_config(f);
  const auto trial = load_trial(a.trial);
  const auto analysis = analyze_trial_detailed(trial, config);
  const auto& s = analysis.scores;
  if (!a.fluctuations.empty()) write_text(a.fluctuations, fluctuation_csv(analysis.dfa, config.dfa));
  if (!a.sync.empty()) write_text(a.sync, sync_csv(analysis.sync));

  const auto fmt_name = format_or(f, "json");
  if (fmt_name == "json") {
    out << dump({{"trial_id", s.trial_id},
                 {"condition", s.condition.name()},
                 {"h_raw", s.h_raw},
                 {"h_eff", s.h_eff},
                 {"m", s.m},
                 {"config", to_json(config)}});
  } else if (fmt_name == "csv") {
    out << "trial_id,condition,h_raw,h_eff,m\n"
        << fmt::format("{},{},{},{},{}\n", s.trial_id, s.condition.name(), s.h_raw, s.h_eff, s.m);
  } else {
    out << "| trial | condition | H_raw | H_eff | M |\n|---|---|---|---|---|\n"
        << fmt::format("| {} | {} | {:.4f} | {:.4f} | {:.4f} |\n", s.trial_id, s.condition.name(), s.h_raw, s.h_eff,
                       s.m);
  }
}

// batch

void cmd_batch(const std::string& manifest_path, const RunFlags& f, std::ostream& out) {
  const auto config = make_config(f);
  const auto manifest = load_manifest(manifest_path);
  const auto trials = load_trials(manifest, config.threads);
  const auto pool = run_pool(trials, config);
  const auto rows = result_rows(pool);
  const auto table = condition_table(rows);

  const auto dir = out_dir(f);
  write_text(dir / "results.csv", results_csv(rows));
  write_text(dir / "summary.csv", condition_table_csv(table));
  write_text(dir / "summary.md", condition_table_markdown(table));
  write_text(dir / "pool.json", dump(pool_identity_json(pool, config)));

  const auto fmt_name = format_or(f, "md");
  if (fmt_name == "md") {
    out << condition_table_markdown(table);
  } else if (fmt_name == "csv") {
    out << condition_table_csv(table);
  } else {
    json summary = json::array();
    for (const auto& r : table)
      summary.push_back({{"condition", r.condition.name()},
                         {"n", r.n},
                         {"h_raw", r.h_raw},
                         {"h_eff", r.h_eff},
                         {"m", r.m},
                         {"psi_mean", r.psi.mean},
                         {"psi_sem", r.psi.sem},
                         {"psi_median", r.psi.median},
                         {"psi_iqr", r.psi.iqr}});
    out << dump({{"pool", pool_identity_json(pool, config)}, {"summary", summary}});
  }
}

// stats

void cmd_stats(const std::string& results_path, const RunFlags& f, std::ostream& out) {
  if (!(f.q > 0.0 && f.q < 1.0)) throw Error(ErrorKind::config, fmt::format("q = {} must lie in (0, 1)", f.q));
  const auto rows = read_results_csv(results_path);
  const auto report = build_stats_report(psi_by_condition(rows), f.q);
  const auto j = to_json(report);
  const auto dir = out_dir(f);
  write_text(dir / "stats.json", dump(j));
  write_text(dir / "stats.md", stats_markdown(report));
  const auto fmt_name = format_or(f, "json");
  if (fmt_name == "md") {
    out << stats_markdown(report);
  } else if (fmt_name == "csv") {
    out << "condition_a,condition_b,t,df,p_raw,p_adjusted,cohens_d,significant\n";
    for (const auto& c : report.comparisons)
      out << fmt::format("{},{},{},{},{},{},{},{}\n", c.condition_a.name(), c.condition_b.name(), c.t, c.df, c.p_raw,
                         c.p_adjusted, c.cohens_d, c.significant ? 1 : 0);
  } else {
    out << dump(j);
  }
}

// robustness

struct RobustnessArgs {
  std::string manifest;
  std::string mode = "layers";
  double fraction = 0.5;
  std::size_t n_seeds = 5;
};

std::string_view panel(RobustnessMode mode) {
  switch (mode) {
    case RobustnessMode::layers: return "fig3a_layers";
    case RobustnessMode::subsample: return "fig3b_subsample";
    case RobustnessMode::seeds: return "fig3c_seeds";
  }
  return "fig3";
}

void cmd_robustness(const RobustnessArgs& a, const RunFlags& f, std::ostream& out) {
  const auto config = make_config(f);
  const auto mode = parse_robustness_mode(a.mode);
  if (!(a.fraction > 0.0 && a.fraction <= 1.0)) throw Error(ErrorKind::config, "--fraction must lie in (0, 1]");
  if (a.n_seeds < 1) throw Error(ErrorKind::config, "--n-seeds must be at least 1");
  const auto manifest = load_manifest(a.manifest);
  const auto trials = load_trials(manifest, config.threads);

  RobustnessReport report;
  switch (mode) {
    case RobustnessMode::layers: report = layer_report(trials, config); break;
    case RobustnessMode::subsample: report = subsample_report(trials, config); break;
    case RobustnessMode::seeds: report = multi_seed_run(trials, config, a.fraction, a.n_seeds); break;
  }

  auto j = to_json(report);
  j["config"] = to_json(config);
  const auto dir = out_dir(f);
  write_text(dir / fmt::format("robustness_{}.json", to_string(mode)), dump(j));
  write_text(dir / fmt::format("{}.csv", panel(mode)), robustness_csv(report));

  const auto fmt_name = format_or(f, "md");
  if (fmt_name == "md") {
    out << robustness_markdown(report);
  } else if (fmt_name == "csv") {
    out << robustness_csv(report);
  } else {
    out << dump(j);
  }
}

// synth

struct SynthArgs {
  std::string kind = "fgn";
  double hurst = 0.7;
  double coupling = 0.0;
  double freq_spread = kDefaultFreqSpread;
  int period = 8;
  double jitter = 0.05;
  std::string analogue = "intact_complex";
  std::size_t t = 256;
  std::size_t c = 128;
  std::size_t trials = 1;
  std::uint64_t channel_seed = 0;
  bool channel_seed_set = false;
  std::string trial_format = "binary";
};

void cmd_synth(const SynthArgs& a, const RunFlags& f, std::ostream& out) {
  if (a.trials < 1) throw Error(ErrorKind::config, "--trials must be at least 1");
  if (f.threads < 0) throw Error(ErrorKind::config, "threads must be >= 0");
  const auto format = a.trial_format == "csv" ? TrialFormat::csv : TrialFormat::binary;
  const auto channel_seed = a.channel_seed_set ? a.channel_seed : f.seed;

  std::vector<ActivationTrial> trials;
  std::string notes;
  if (a.kind == "battery") {
    if (a.t < 32 || a.c < 8) throw Error(ErrorKind::config, "battery needs t >= 32 and c >= 8");
    trials = make_battery(a.trials, f.seed, a.t, a.c, {}, f.threads);
    notes = fmt::format("synthetic battery, {} trials per condition, seed {}", a.trials, f.seed);
  } else {
    SynthSpec spec;
    spec.kind = parse_synth_kind(a.kind);
    spec.hurst = a.hurst;
    spec.coupling = a.coupling;
    spec.freq_spread = a.freq_spread;
    spec.period = a.period;
    spec.jitter = a.jitter;
    spec.analogue = Condition::parse(a.analogue);
    spec.t = a.t;
    spec.c = a.c;
    spec.validate();
    for (std::size_t i = 0; i < a.trials; ++i) {
      spec.seed = derive_seed(f.seed, i);
      auto trial = generate_trial(spec, fmt::format("{}_{:02}", a.kind, i));
      if (spec.c % 4 == 0) assign_channel_layout(trial, channel_seed);
      trials.push_back(std::move(trial));
    }
    notes = fmt::format("synthetic {} trials, seed {}", a.kind, f.seed);
  }

  const auto dir = out_dir(f);
  const auto manifest = write_trials(trials, dir, channel_seed, notes, format);
  const auto fmt_name = format_or(f, "json");
  if (fmt_name == "json") {
    out << dump({{"manifest", (dir / "manifest.json").string()},
                 {"trials", manifest.trials.size()},
                 {"seed", f.seed},
                 {"channel_seed", channel_seed}});
  } else {
    out << "path,condition\n";
    for (const auto& e : manifest.trials) out << fmt::format("{},{}\n", e.path.string(), e.condition.name());
  }
}

// report

struct ReportArgs {
  std::string results;
  std::string stats;
  std::vector<std::string> robustness;
};

void cmd_report(const ReportArgs& a, const RunFlags& f, std::ostream& out) {
  const auto rows = read_results_csv(a.results);
  StatsReport stats;
  if (a.stats.empty()) {
    stats = build_stats_report(psi_by_condition(rows), f.q);
  } else {
    stats = stats_report_from_json(read_json(a.stats));
  }
  std::vector<RobustnessReport> robustness;
  for (const auto& path : a.robustness) robustness.push_back(robustness_report_from_json(read_json(path)));

  const auto table = condition_table(rows);
  const auto markdown = report_markdown(rows, stats, robustness);
  const auto dir = out_dir(f);
  write_text(dir / "report.md", markdown);
  write_text(dir / "fig1.csv", figure1_csv(table));
  write_text(dir / "fig2_summary.csv", figure2_summary_csv(rows));
  write_text(dir / "fig2_trials.csv", figure2_trials_csv(rows));
  for (const auto& r : robustness) write_text(dir / fmt::format("{}.csv", panel(r.mode)), robustness_csv(r));

  const auto fmt_name = format_or(f, "md");
  if (fmt_name == "csv") {
    out << figure1_csv(table);
  } else if (fmt_name == "json") {
    out << dump({{"stats", to_json(stats)}, {"robustness_sections", robustness.size()}});
  } else {
    out << markdown;
  }
}

void add_run_flags(CLI::App& app, RunFlags& f) {
  app.add_option("--band-low", f.band_low, "lower band edge, cycles/token")->capture_default_str();
  app.add_option("--band-high", f.band_high, "upper band edge, cycles/token")->capture_default_str();
  app.add_option("--filter-order", f.filter_order, "Butterworth prototype order")->capture_default_str();
  app.add_option("--dfa-scales", f.dfa_scales, "comma separated DFA window sizes")->capture_default_str();
  app.add_option("--dfa-average", f.dfa_average, "F(s) aggregation: pooled or mean")
      ->check(CLI::IsMember({"pooled", "mean"}))
      ->capture_default_str();
  app.add_option("--h-opt", f.h_opt, "tuning optimum")->capture_default_str();
  app.add_option("--sigma-h", f.sigma_h, "tuning width")->capture_default_str();
  app.add_option("--weights", f.weights, "w_h,w_m")->capture_default_str();
  app.add_option("--q", f.q, "FDR target")->capture_default_str();
  app.add_option("--seed", f.seed, "base seed")->capture_default_str();
  app.add_option("--threads", f.threads, "worker threads, 0 = auto")->capture_default_str();
  app.add_flag("--trim{16}", f.trim, "drop edge samples from M (16, or --trim=N)");
  app.add_option("--format", f.format, "stdout format")->check(CLI::IsMember({"json", "csv", "md"}));
  app.add_option("-o,--out", f.out, "output directory")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Composite index toolkit for multichannel activation traces", "psi"};
  app.require_subcommand(1);
  RunFlags flags;
  add_run_flags(app, flags);
  app.fallthrough();

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "H and M for a single trial");
  analyze->add_option("trial", analyze_args.trial, "trial file (.psia or .csv)")->required();
  analyze->add_option("--fluctuations", analyze_args.fluctuations, "write the F(s) table as CSV");
  analyze->add_option("--sync", analyze_args.sync, "write R(t) as CSV");

  std::string manifest_path;
  auto* batch = app.add_subcommand("batch", "full pipeline over a manifest");
  batch->add_option("manifest", manifest_path, "manifest JSON")->required();

  std::string results_path;
  auto* stats = app.add_subcommand("stats", "ANOVA, Welch comparisons and FDR over a results CSV");
  stats->add_option("results", results_path, "results CSV from batch")->required();

  RobustnessArgs rob_args;
  auto* robustness = app.add_subcommand("robustness", "layer, subsample and multi-seed reruns");
  robustness->add_option("manifest", rob_args.manifest, "manifest JSON")->required();
  robustness->add_option("--mode", rob_args.mode, "layers, subsample or seeds")
      ->check(CLI::IsMember({"layers", "subsample", "seeds"}))
      ->capture_default_str();
  robustness->add_option("--fraction", rob_args.fraction, "channel fraction for --mode seeds")->capture_default_str();
  robustness->add_option("--n-seeds", rob_args.n_seeds, "seed count for --mode seeds")->capture_default_str();

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate synthetic trials and a manifest");
  synth->add_option("--kind", synth_args.kind,
                    "fgn, random_walk, white, periodic, kuramoto, condition_analogue or battery")
      ->capture_default_str();
  synth->add_option("--hurst", synth_args.hurst)->capture_default_str();
  synth->add_option("--coupling", synth_args.coupling, "Kuramoto coupling K")->capture_default_str();
  synth->add_option("--freq-spread", synth_args.freq_spread, "sd of natural frequencies, rad/token")
      ->capture_default_str();
  synth->add_option("--period", synth_args.period)->capture_default_str();
  synth->add_option("--jitter", synth_args.jitter)->capture_default_str();
  synth->add_option("--analogue", synth_args.analogue, "condition for --kind condition_analogue")
      ->capture_default_str();
  synth->add_option("--t", synth_args.t, "time steps")->capture_default_str();
  synth->add_option("--c", synth_args.c, "channels")->capture_default_str();
  synth->add_option("--trials", synth_args.trials, "trials (per condition for battery)")->capture_default_str();
  synth->add_option("--channel-seed", synth_args.channel_seed, "seed for the channel layout (default --seed)");
  synth->add_option("--trial-format", synth_args.trial_format, "binary or csv")
      ->check(CLI::IsMember({"binary", "csv"}))
      ->capture_default_str();

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "markdown report and figure CSVs");
  report->add_option("results", report_args.results, "results CSV from batch")->required();
  report->add_option("--stats", report_args.stats, "stats JSON (recomputed when absent)");
  report->add_option("--robustness", report_args.robustness, "robustness JSON files");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    report_error(err, "usage", e.what());
    return kExitUsage;
  }

  try {
    synth_args.channel_seed_set = synth->count("--channel-seed") > 0;
    if (*analyze) cmd_analyze(analyze_args, flags, out);
    else if (*batch) cmd_batch(manifest_path, flags, out);
    else if (*stats) cmd_stats(results_path, flags, out);
    else if (*robustness) cmd_robustness(rob_args, flags, out);
    else if (*synth) cmd_synth(synth_args, flags, out);
    else if (*report) cmd_report(report_args, flags, out);
  } catch (const Error& e) {
    report_error(err, to_string(e.kind()), e.what(), e.channel());
    return exit_code(e.kind());
  } catch (const json::exception& e) {
    report_error(err, "format", e.what());
    return kExitFormat;
  } catch (const std::exception& e) {
    report_error(err, "internal", e.what());
    return 1;
  }
  return kExitOk;
}

}  // namespace psi::cli
