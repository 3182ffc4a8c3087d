#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "factgauntlet/domain.hpp"

namespace factgauntlet {

/// Outcome of one attacked claim in one trial.
struct ClaimResult {
  std::string claim_id;
  std::string attack;
  double rate = 0.0;
  std::size_t trial = 0;
  VeracityLabel gold = VeracityLabel::Supported;
  VeracityLabel pre_verdict = VeracityLabel::Supported;
  VeracityLabel post_verdict = VeracityLabel::Supported;
  OutcomeClass outcome = OutcomeClass::Unchanged;
  std::size_t injected_count = 0;
  std::size_t retrieved_total = 0;
  std::size_t retrieved_malicious = 0;

  /// Throws ValidationError when retrieved_malicious > retrieved_total or the
  /// outcome disagrees with classify_outcome(gold, post_verdict).
  void validate() const;

  friend bool operator==(const ClaimResult&, const ClaimResult&) = default;
};

void to_json(nlohmann::json& j, const ClaimResult& r);
void from_json(const nlohmann::json& j, ClaimResult& r);

struct Metrics {
  std::size_t n_claims = 0;
  std::size_t inverted = 0;
  std::size_t degraded = 0;
  std::size_t retrieved_total = 0;
  std::size_t retrieved_malicious = 0;
  double asr = 0.0;  ///< inverted / n
  double sfr = 0.0;  ///< (inverted + degraded) / n
  double sir = 0.0;  ///< sum(retrieved_malicious) / sum(retrieved_total); 0 when nothing was retrieved

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

struct MetricsSummary {
  Metrics overall;
  std::map<double, Metrics> per_rate;
  /// Diagnostic per-claim SIR, pooled over that claim's results.
  std::map<std::string, double> per_claim_sir;
};

void to_json(nlohmann::json& j, const Metrics& m);
void from_json(const nlohmann::json& j, Metrics& m);

/// Throws ValidationError on empty input.
Metrics compute_core_metrics(std::span<const ClaimResult> results);
MetricsSummary compute_metrics(std::span<const ClaimResult> results);

}  // namespace factgauntlet
