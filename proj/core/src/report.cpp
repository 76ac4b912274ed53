#include "psi/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "psi/error.hpp"

namespace psi {
namespace {

constexpr std::string_view kResultsHeader = "trial_id,condition,h_raw,h_eff,m,h_z,m_z,psi";

double parse_field(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw Error(ErrorKind::format, fmt::format("results line {}: bad number '{}'", line, s));
  return v;
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

template <typename T>
T get_or_throw(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, fmt::format("field '{}': {}", key, e.what()));
  }
}

}  // namespace

std::vector<ResultRow> result_rows(const PoolResult& pool) {
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < pool.scores.size(); ++i) {
    const auto& s = pool.scores[i];
    const auto& p = pool.psi[i];
    rows.push_back({s.trial_id, s.condition, s.h_raw, s.h_eff, s.m, p.h_z, p.m_z, p.psi});
  }
  return rows;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  fmt::memory_buffer buf;
  auto out = std::back_inserter(buf);
  fmt::format_to(out, "{}\n", kResultsHeader);
  for (const auto& r : rows)
    fmt::format_to(out, "{},{},{},{},{},{},{},{}\n", r.trial_id, r.condition.name(), r.h_raw, r.h_eff, r.m, r.h_z, r.m_z,
                   r.psi);
  return fmt::to_string(buf);
}

std::vector<ResultRow> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::format, "empty results file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader)
    throw Error(ErrorKind::format, fmt::format("results header must be '{}', found '{}'", kResultsHeader, line));

  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_line(line);
    if (f.size() != 8) throw Error(ErrorKind::format, fmt::format("results line {}: expected 8 fields", line_no));
    rows.push_back({std::string(f[0]), Condition::parse(f[1]), parse_field(f[2], line_no), parse_field(f[3], line_no),
                    parse_field(f[4], line_no), parse_field(f[5], line_no), parse_field(f[6], line_no),
                    parse_field(f[7], line_no)});
  }
  return rows;
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) { return parse_results_csv(read_text(path)); }

std::vector<std::pair<Condition, std::vector<double>>> psi_by_condition(const std::vector<ResultRow>& rows) {
  std::map<Condition, std::vector<double>> groups;
  for (const auto& r : rows) groups[r.condition].push_back(r.psi);
  return {groups.begin(), groups.end()};
}

std::vector<ConditionTableRow> condition_table(const std::vector<ResultRow>& rows) {
  std::map<Condition, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) groups[r.condition].push_back(&r);
  std::vector<ConditionTableRow> table;
  for (const auto& [condition, members] : groups) {
    ConditionTableRow row;
    row.condition = condition;
    row.n = members.size();
    std::vector<double> psi;
    for (const auto* r : members) {
      row.h_raw += r->h_raw;
      row.h_eff += r->h_eff;
      row.m += r->m;
      psi.push_back(r->psi);
    }
    const auto n = static_cast<double>(members.size());
    row.h_raw /= n;
    row.h_eff /= n;
    row.m /= n;
    row.psi = condition_summary(psi, condition);
    table.push_back(std::move(row));
  }
  return table;
}

std::string condition_table_csv(const std::vector<ConditionTableRow>& table) {
  std::string out = "condition,n,h_raw,h_eff,m,psi_mean,psi_sem,psi_median,psi_iqr\n";
  for (const auto& r : table)
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.condition.name(), r.n, r.h_raw, r.h_eff, r.m, r.psi.mean,
                       r.psi.sem, r.psi.median, r.psi.iqr);
  return out;
}

std::string condition_table_markdown(const std::vector<ConditionTableRow>& table) {
  std::string out = "| Condition | n | H | H_eff | M | Psi' (mean ± SEM) |\n|---|---|---|---|---|---|\n";
  for (const auto& r : table)
    out += fmt::format("| {} | {} | {:.3f} | {:.3f} | {:.3f} | {:.3f} ± {:.3f} |\n", r.condition.name(), r.n, r.h_raw,
                       r.h_eff, r.m, r.psi.mean, r.psi.sem);
  for (const auto& r : table)
    if (r.n < 2) {
      out += fmt::format("\nWarning: condition '{}' has only {} trial(s); SEM is not defined.\n", r.condition.name(), r.n);
    }
  return out;
}

nlohmann::json pool_identity_json(const PoolResult& pool, const RunConfig& config) {
  return {{"pool_size", pool.pool_ids.size()}, {"trial_ids", pool.pool_ids}, {"config", to_json(config)}};
}

nlohmann::json to_json(const StatsReport& report) {
  nlohmann::json comparisons = nlohmann::json::array();
  for (const auto& c : report.comparisons)
    comparisons.push_back({{"condition_a", c.condition_a.name()},
                           {"condition_b", c.condition_b.name()},
                           {"t", c.t},
                           {"df", c.df},
                           {"p_raw", c.p_raw},
                           {"p_adjusted", c.p_adjusted},
                           {"cohens_d", c.cohens_d},
                           {"significant", c.significant}});
  nlohmann::json summaries = nlohmann::json::array();
  for (const auto& s : report.summaries)
    summaries.push_back({{"condition", s.condition.name()},
                         {"n", s.n},
                         {"mean", s.mean},
                         {"sem", s.sem},
                         {"median", s.median},
                         {"q25", s.q25},
                         {"q75", s.q75},
                         {"iqr", s.iqr}});
  const auto& a = report.anova;
  return {{"anova",
           {{"f", a.f},
            {"df_between", a.df_between},
            {"df_within", a.df_within},
            {"p", a.p},
            {"eta_squared", a.eta_squared},
            {"ss_between", a.ss_between},
            {"ss_within", a.ss_within}}},
          {"comparisons", comparisons},
          {"summaries", summaries},
          {"q", report.q}};
}

StatsReport stats_report_from_json(const nlohmann::json& j) {
  StatsReport r;
  try {
    const auto& a = j.at("anova");
    r.anova = {a.at("f").get<double>(),           a.at("df_between").get<int>(),     a.at("df_within").get<int>(),
               a.at("p").get<double>(),           a.at("eta_squared").get<double>(), a.at("ss_between").get<double>(),
               a.at("ss_within").get<double>()};
    for (const auto& c : j.at("comparisons"))
      r.comparisons.push_back({Condition::parse(c.at("condition_a").get<std::string>()),
                               Condition::parse(c.at("condition_b").get<std::string>()), c.at("t").get<double>(),
                               c.at("df").get<double>(), c.at("p_raw").get<double>(), c.at("p_adjusted").get<double>(),
                               c.at("cohens_d").get<double>(), c.at("significant").get<bool>()});
    for (const auto& s : j.at("summaries"))
      r.summaries.push_back({Condition::parse(s.at("condition").get<std::string>()), s.at("n").get<std::size_t>(),
                             s.at("mean").get<double>(), s.at("sem").get<double>(), s.at("median").get<double>(),
                             s.at("q25").get<double>(), s.at("q75").get<double>(), s.at("iqr").get<double>()});
    r.q = j.at("q").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, fmt::format("stats report does not match the schema: {}", e.what()));
  }
  return r;
}

std::string stats_markdown(const StatsReport& report) {
  const auto& a = report.anova;
  std::string out = fmt::format("One-way ANOVA: F({}, {}) = {:.3f}, p = {:.4g}, eta^2 = {:.3f}\n\n", a.df_between,
                                a.df_within, a.f, a.p, a.eta_squared);
  out += "| Condition | n | mean | SEM | median | IQR |\n|---|---|---|---|---|---|\n";
  for (const auto& s : report.summaries)
    out += fmt::format("| {} | {} | {:.3f} | {:.3f} | {:.3f} | {:.3f} |\n", s.condition.name(), s.n, s.mean, s.sem,
                       s.median, s.iqr);
  out += fmt::format("\nPairwise Welch t-tests, Benjamini-Hochberg at q = {}:\n\n", report.q);
  out += "| A | B | t | df | p | p (BH) | d | significant |\n|---|---|---|---|---|---|---|---|\n";
  for (const auto& c : report.comparisons)
    out += fmt::format("| {} | {} | {:.3f} | {:.2f} | {:.4g} | {:.4g} | {:.3f} | {} |\n", c.condition_a.name(),
                       c.condition_b.name(), c.t, c.df, c.p_raw, c.p_adjusted, c.cohens_d, c.significant ? "yes" : "no");
  return out;
}

nlohmann::json to_json(const RobustnessReport& report) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& run : report.runs) {
    nlohmann::json conditions = nlohmann::json::array();
    for (const auto& c : run.conditions)
      conditions.push_back({{"condition", c.condition.name()},
                            {"mean_psi", c.mean_psi},
                            {"std_across_seeds", c.std_across_seeds},
                            {"per_seed", c.per_seed}});
    runs.push_back({{"label", run.label},
                    {"seeds", run.seeds},
                    {"conditions", conditions},
                    {"pools", run.pools},
                    {"pools_ordering_held", run.pools_ordering_held},
                    {"pools_complex_top", run.pools_complex_top},
                    {"ordering_stable", run.ordering_stable}});
  }
  return {{"mode", to_string(report.mode)},
          {"runs", runs},
          {"ordering_stable", report.ordering_stable},
          {"low_n", report.low_n}};
}

RobustnessReport robustness_report_from_json(const nlohmann::json& j) {
  RobustnessReport r;
  try {
    r.mode = parse_robustness_mode(j.at("mode").get<std::string>());
    for (const auto& jr : j.at("runs")) {
      RobustnessRun run;
      run.label = jr.at("label").get<std::string>();
      run.seeds = jr.at("seeds").get<std::vector<std::uint64_t>>();
      for (const auto& jc : jr.at("conditions"))
        run.conditions.push_back({Condition::parse(jc.at("condition").get<std::string>()), jc.at("mean_psi").get<double>(),
                                  jc.at("std_across_seeds").get<double>(), jc.at("per_seed").get<std::vector<double>>()});
      run.pools = jr.at("pools").get<std::size_t>();
      run.pools_ordering_held = jr.at("pools_ordering_held").get<std::size_t>();
      run.pools_complex_top = jr.at("pools_complex_top").get<std::size_t>();
      run.ordering_stable = jr.at("ordering_stable").get<bool>();
      r.runs.push_back(std::move(run));
    }
    r.ordering_stable = j.at("ordering_stable").get<bool>();
    r.low_n = j.at("low_n").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, fmt::format("robustness report does not match the schema: {}", e.what()));
  }
  return r;
}

std::string robustness_csv(const RobustnessReport& report) {
  std::string out;
  switch (report.mode) {
    case RobustnessMode::layers:
      out = "run,condition,mean_psi\n";
      for (const auto& run : report.runs)
        for (const auto& c : run.conditions) out += fmt::format("{},{},{}\n", run.label, c.condition.name(), c.mean_psi);
      break;
    case RobustnessMode::subsample:
      out = "run,seed_count,condition,mean_psi,std_across_seeds\n";
      for (const auto& run : report.runs)
        for (const auto& c : run.conditions)
          out += fmt::format("{},{},{},{},{}\n", run.label, run.seeds.size(), c.condition.name(), c.mean_psi,
                             c.std_across_seeds);
      break;
    case RobustnessMode::seeds:
      out = "seed_index,seed,condition,mean_psi\n";
      for (const auto& run : report.runs)
        for (const auto& c : run.conditions)
          for (std::size_t k = 0; k < c.per_seed.size(); ++k)
            out += fmt::format("{},{},{},{}\n", k, run.seeds.at(k), c.condition.name(), c.per_seed[k]);
      break;
  }
  return out;
}

std::string robustness_markdown(const RobustnessReport& report) {
  std::string out = fmt::format("Robustness ({}): ordering {} across all runs{}\n\n", to_string(report.mode),
                                report.ordering_stable ? "stable" : "NOT stable",
                                report.low_n ? " (warning: some condition has fewer than two trials)" : "");
  out += "| Run | Condition | mean Psi' | sd across seeds |\n|---|---|---|---|\n";
  for (const auto& run : report.runs)
    for (const auto& c : run.conditions)
      out += fmt::format("| {} | {} | {:.3f} | {:.3f} |\n", run.label, c.condition.name(), c.mean_psi, c.std_across_seeds);
  out += "\n";
  for (const auto& run : report.runs)
    out += fmt::format("- {}: ordering held in {}/{} pools; intact_complex on top in {}/{}\n", run.label,
                       run.pools_ordering_held, run.pools, run.pools_complex_top, run.pools);
  return out;
}

std::string figure1_csv(const std::vector<ConditionTableRow>& table) {
  std::string out = "condition,n,mean_psi,sem\n";
  for (const auto& r : table) out += fmt::format("{},{},{},{}\n", r.condition.name(), r.n, r.psi.mean, r.psi.sem);
  return out;
}

std::string figure2_summary_csv(const std::vector<ResultRow>& rows) {
  std::string out = "condition,n,median,q25,q75,iqr,whisker_low,whisker_high\n";
  for (const auto& [condition, values] : psi_by_condition(rows)) {
    const auto s = condition_summary(values, condition);
    out += fmt::format("{},{},{},{},{},{},{},{}\n", condition.name(), s.n, s.median, s.q25, s.q75, s.iqr,
                       s.q25 - 1.5 * s.iqr, s.q75 + 1.5 * s.iqr);
  }
  return out;
}

std::string figure2_trials_csv(const std::vector<ResultRow>& rows) {
  std::string out = "trial_id,condition,psi\n";
  for (const auto& r : rows) out += fmt::format("{},{},{}\n", r.trial_id, r.condition.name(), r.psi);
  return out;
}

std::string fluctuation_csv(const DfaResult& result, const DfaConfig& config) {
  std::string out = "channel,h";
  for (int s : config.window_sizes) out += fmt::format(",F{}", s);
  out += "\n";
  for (std::size_t c = 0; c < result.fluctuation_table.rows(); ++c) {
    out += fmt::format("{},{}", c, result.per_channel_h[c]);
    for (std::size_t k = 0; k < result.fluctuation_table.cols(); ++k)
      out += fmt::format(",{}", result.fluctuation_table(c, k));
    out += "\n";
  }
  return out;
}

std::string sync_csv(const SyncSeries& series) {
  std::string out = "t,r\n";
  for (std::size_t t = 0; t < series.r.size(); ++t) out += fmt::format("{},{}\n", t, series.r[t]);
  return out;
}

std::string report_markdown(const std::vector<ResultRow>& rows, const StatsReport& stats,
                            const std::vector<RobustnessReport>& robustness) {
  std::string out = "# Dynamical organisation report\n\n";
  out += fmt::format("Pool of {} trials. Psi' is relative to this pool.\n\n", rows.size());
  out += "## Per-condition means (figure 1)\n\n";
  out += condition_table_markdown(condition_table(rows));
  out += "\n## Per-trial distribution (figure 2)\n\n";
  out += "| Condition | median | q25 | q75 | IQR | whisker low | whisker high |\n|---|---|---|---|---|---|---|\n";
  for (const auto& [condition, values] : psi_by_condition(rows)) {
    const auto s = condition_summary(values, condition);
    out += fmt::format("| {} | {:.3f} | {:.3f} | {:.3f} | {:.3f} | {:.3f} | {:.3f} |\n", condition.name(), s.median,
                       s.q25, s.q75, s.iqr, s.q25 - 1.5 * s.iqr, s.q75 + 1.5 * s.iqr);
  }
  out += "\n## Statistics\n\n" + stats_markdown(stats);
  out += "\n## Robustness (figure 3)\n\n";
  if (robustness.empty()) {
    out += "No robustness results were supplied; this section is omitted.\n";
  } else {
    for (const auto& r : robustness) out += robustness_markdown(r) + "\n";
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw Error(ErrorKind::io, fmt::format("write failed for {}", path.string()));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, fmt::format("cannot open {}", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::format, fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace psi
