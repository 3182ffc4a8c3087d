#include "factgauntlet/report.hpp"

#include <fstream>

#include <fmt/format.h>

#include "factgauntlet/bootstrap.hpp"
#include "factgauntlet/config.hpp"
#include "factgauntlet/error.hpp"

namespace factgauntlet {

namespace fs = std::filesystem;

namespace {

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string percent(double x) { return fmt::format("{:.1f}", 100.0 * x); }

std::string mark(const std::optional<bool>& significant) {
  return significant.value_or(false) ? "+" : "";
}

std::string flag(const std::optional<bool>& significant) {
  if (!significant) return "";
  return *significant ? "1" : "0";
}

}  // namespace

void to_json(nlohmann::json& j, const SummaryRow& r) {
  j = nlohmann::json{{"attack", r.attack},          {"victim", r.victim},
                     {"defense", r.defense},        {"rate", r.rate},
                     {"metrics", r.metrics},        {"failures", r.failures},
                     {"per_claim_sir", r.per_claim_sir}};
}

void from_json(const nlohmann::json& j, SummaryRow& r) {
  r.attack = j.at("attack").get<std::string>();
  r.victim = j.at("victim").get<std::string>();
  r.defense = j.at("defense").get<std::string>();
  r.rate = j.at("rate").get<double>();
  r.metrics = j.at("metrics").get<Metrics>();
  r.failures = j.value("failures", std::size_t{0});
  r.per_claim_sir = j.value("per_claim_sir", std::map<std::string, double>{});
}

void to_json(nlohmann::json& j, const PValueEntry& e) {
  j = nlohmann::json{{"rate", e.rate},     {"attack_a", e.attack_a}, {"attack_b", e.attack_b},
                     {"metric", e.metric}, {"n_pairs", e.n_pairs},
                     {"p", e.p ? nlohmann::json(*e.p) : nlohmann::json()}};
}

void from_json(const nlohmann::json& j, PValueEntry& e) {
  e.rate = j.at("rate").get<double>();
  e.attack_a = j.at("attack_a").get<std::string>();
  e.attack_b = j.at("attack_b").get<std::string>();
  e.metric = j.at("metric").get<std::string>();
  e.n_pairs = j.value("n_pairs", std::size_t{0});
  e.p = j.contains("p") && j["p"].is_number() ? std::optional<double>(j["p"].get<double>())
                                              : std::nullopt;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "attack,victim,defense,rate,asr,sfr,sir,n\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.attack, r.victim, r.defense,
                       format_rate(r.rate), r.metrics.asr, r.metrics.sfr, r.metrics.sir,
                       r.metrics.n_claims);
  return out;
}

std::optional<double> find_p_value(const std::vector<PValueEntry>& entries, double rate,
                                   const std::string& attack, const std::string& baseline,
                                   const std::string& metric) {
  for (const auto& e : entries)
    if (e.rate == rate && e.attack_a == attack && e.attack_b == baseline && e.metric == metric)
      return e.p;
  return std::nullopt;
}

LoadedRun load_run(const fs::path& results_root, const std::string& run_id) {
  const auto dir = results_root / run_id;
  if (run_id.empty() || !fs::is_directory(dir) || !fs::exists(dir / "summary.json"))
    throw ValidationError("unknown run id '" + run_id + "' (no " + (dir / "summary.json").string() +
                          ")");
  LoadedRun run;
  run.run_id = run_id;
  try {
    run.rows = read_json(dir / "summary.json").at("rows").get<std::vector<SummaryRow>>();
    if (fs::exists(dir / "pvalues.json"))
      run.pvalues = read_json(dir / "pvalues.json").at("entries").get<std::vector<PValueEntry>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(dir.string() + ": " + e.what());
  }
  return run;
}

ReportTable build_report(const std::vector<LoadedRun>& runs,
                         const std::optional<std::string>& baseline) {
  ReportTable table;
  table.baseline = baseline;
  for (const auto& run : runs) {
    for (const auto& row : run.rows) {
      ReportLine line{run.run_id, row, std::nullopt, std::nullopt};
      if (baseline && row.attack != *baseline) {
        const auto significant = [&](const char* metric) -> std::optional<bool> {
          const auto p = find_p_value(run.pvalues, row.rate, row.attack, *baseline, metric);
          if (!p) return std::nullopt;
          return *p <= kSignificanceLevel;
        };
        line.asr_significant = significant("asr");
        line.sfr_significant = significant("sfr");
      }
      table.lines.push_back(std::move(line));
    }
  }
  return table;
}

std::string render_report_text(const ReportTable& table) {
  std::size_t attack_w = 6;
  for (const auto& l : table.lines) attack_w = std::max(attack_w, l.row.attack.size());

  std::string out = fmt::format("{:<12}  {:<{}}  {:<8}  {:<12}  {:>6}  {:>7}  {:>7}  {:>7}  {:>5}\n",
                                "run", "attack", attack_w, "victim", "defense", "rate", "ASR",
                                "SFR", "SIR", "n");
  for (const auto& l : table.lines) {
    const auto& m = l.row.metrics;
    out += fmt::format("{:<12}  {:<{}}  {:<8}  {:<12}  {:>6}  {:>7}  {:>7}  {:>7}  {:>5}\n",
                       l.run_id, l.row.attack, attack_w, l.row.victim, l.row.defense,
                       format_rate(l.row.rate), percent(m.asr) + mark(l.asr_significant),
                       percent(m.sfr) + mark(l.sfr_significant), percent(m.sir), m.n_claims);
  }
  if (table.baseline)
    out += fmt::format("\n'+' marks a significant improvement over {} (one-sided paired "
                       "bootstrap, p <= {}).\n",
                       *table.baseline, kSignificanceLevel);
  return out;
}

std::string render_report_csv(const ReportTable& table) {
  std::string out = "run_id,attack,victim,defense,rate,asr,sfr,sir,n";
  if (table.baseline) out += ",asr_sig,sfr_sig";
  out += "\n";
  for (const auto& l : table.lines) {
    const auto& m = l.row.metrics;
    out += fmt::format("{},{},{},{},{},{},{},{},{}", l.run_id, l.row.attack, l.row.victim,
                       l.row.defense, format_rate(l.row.rate), m.asr, m.sfr, m.sir, m.n_claims);
    if (table.baseline) out += "," + flag(l.asr_significant) + "," + flag(l.sfr_significant);
    out += "\n";
  }
  return out;
}

}  // namespace factgauntlet
