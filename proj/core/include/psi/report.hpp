#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "psi/dfa.hpp"
#include "psi/metastability.hpp"
#include "psi/pipeline.hpp"
#include "psi/robustness.hpp"
#include "psi/stats.hpp"

namespace psi {

// One line of the results CSV.
struct ResultRow {
  std::string trial_id;
  Condition condition;
  double h_raw = 0.0;
  double h_eff = 0.0;
  double m = 0.0;
  double h_z = 0.0;
  double m_z = 0.0;
  double psi = 0.0;
};

std::vector<ResultRow> result_rows(const PoolResult& pool);

// trial_id,condition,h_raw,h_eff,m,h_z,m_z,psi
std::string results_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_csv(const std::string& text);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

// Psi values grouped by condition, in canonical condition order.
std::vector<std::pair<Condition, std::vector<double>>> psi_by_condition(const std::vector<ResultRow>& rows);

// Per-condition component means and psi mean +- SEM.
struct ConditionTableRow {
  Condition condition;
  std::size_t n = 0;
  double h_raw = 0.0;
  double h_eff = 0.0;
  double m = 0.0;
  ConditionSummary psi;
};

std::vector<ConditionTableRow> condition_table(const std::vector<ResultRow>& rows);
std::string condition_table_csv(const std::vector<ConditionTableRow>& table);
std::string condition_table_markdown(const std::vector<ConditionTableRow>& table);

nlohmann::json pool_identity_json(const PoolResult& pool, const RunConfig& config);

nlohmann::json to_json(const StatsReport& report);
StatsReport stats_report_from_json(const nlohmann::json& j);
std::string stats_markdown(const StatsReport& report);

nlohmann::json to_json(const RobustnessReport& report);
RobustnessReport robustness_report_from_json(const nlohmann::json& j);

// Panel CSV for one robustness report: layer runs (run,condition,mean_psi),
// subsampling (run,seed_count,condition,mean_psi,std_across_seeds) or
// per-seed values (seed_index,seed,condition,mean_psi).
std::string robustness_csv(const RobustnessReport& report);
std::string robustness_markdown(const RobustnessReport& report);

// Figure-ready tables.
std::string figure1_csv(const std::vector<ConditionTableRow>& table);  // condition,n,mean_psi,sem
std::string figure2_summary_csv(const std::vector<ResultRow>& rows);   // quartiles and 1.5 IQR whiskers
std::string figure2_trials_csv(const std::vector<ResultRow>& rows);    // trial_id,condition,psi

std::string fluctuation_csv(const DfaResult& result, const DfaConfig& config);
std::string sync_csv(const SyncSeries& series);

// Assembles the markdown report; robustness sections are omitted with a notice
// when no robustness reports are given.
std::string report_markdown(const std::vector<ResultRow>& rows, const StatsReport& stats,
                            const std::vector<RobustnessReport>& robustness);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace psi
