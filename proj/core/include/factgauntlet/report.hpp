#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "factgauntlet/metrics.hpp"

namespace factgauntlet {

/// One line of summary.csv: metrics for an (attack, rate) cell of a run.
struct SummaryRow {
  std::string attack;
  std::string victim;
  std::string defense;
  double rate = 0.0;
  Metrics metrics;
  std::size_t failures = 0;
  std::map<std::string, double> per_claim_sir;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

/// One-sided paired bootstrap of attack_a against attack_b at one rate.
struct PValueEntry {
  double rate = 0.0;
  std::string attack_a;
  std::string attack_b;
  std::string metric;  ///< "asr" or "sfr"
  std::size_t n_pairs = 0;
  std::optional<double> p;  ///< empty when fewer than two pairs exist

  friend bool operator==(const PValueEntry&, const PValueEntry&) = default;
};

void to_json(nlohmann::json& j, const SummaryRow& r);
void from_json(const nlohmann::json& j, SummaryRow& r);
void to_json(nlohmann::json& j, const PValueEntry& e);
void from_json(const nlohmann::json& j, PValueEntry& e);

/// Header plus one line per row:
/// attack,victim,defense,rate,asr,sfr,sir,n
std::string summary_csv(const std::vector<SummaryRow>& rows);

/// p-value of `attack` beating `baseline` on `metric` at `rate`, if recorded.
std::optional<double> find_p_value(const std::vector<PValueEntry>& entries, double rate,
                                   const std::string& attack, const std::string& baseline,
                                   const std::string& metric);

struct LoadedRun {
  std::string run_id;
  std::vector<SummaryRow> rows;
  std::vector<PValueEntry> pvalues;
};

/// Reads summary.json and pvalues.json from `results_root/<run_id>`. Throws
/// ValidationError for unknown run ids.
LoadedRun load_run(const std::filesystem::path& results_root, const std::string& run_id);

struct ReportLine {
  std::string run_id;
  SummaryRow row;
  /// Significance against the baseline; empty for the baseline itself or
  /// when no p-value exists.
  std::optional<bool> asr_significant;
  std::optional<bool> sfr_significant;
};

struct ReportTable {
  std::optional<std::string> baseline;
  std::vector<ReportLine> lines;
};

/// Without a baseline the table carries no significance marks. A metric is
/// marked "+" iff its p-value against the baseline is <= 0.05.
ReportTable build_report(const std::vector<LoadedRun>& runs,
                         const std::optional<std::string>& baseline);

/// Fixed-width text table with ASR/SFR/SIR in percent.
std::string render_report_text(const ReportTable& table);
/// run_id,attack,victim,defense,rate,asr,sfr,sir,n[,asr_sig,sfr_sig]
std::string render_report_csv(const ReportTable& table);

}  // namespace factgauntlet
