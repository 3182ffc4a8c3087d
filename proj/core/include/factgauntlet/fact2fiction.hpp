#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "factgauntlet/attacks.hpp"
#include "factgauntlet/payload.hpp"

namespace factgauntlet {

/// Planner and Executor steps of the Fact2Fiction attack. Each step takes an
/// optional warnings sink for recoverable fallbacks.
using Warnings = std::vector<std::string>;

/// 1..max_q surrogate sub-questions. Retries the completion once when nothing
/// can be extracted, then throws ParseError.
std::vector<std::string> f2f_decompose(const Claim& claim, const LlmBackend& backend,
                                       std::size_t max_q = 10);

/// One adversarial answer per question, in question order. With
/// `use_justification == false` the prompt omits the justification block.
/// A reply with the wrong number of answers (or unparseable JSON) is
/// re-requested once, then ParseError.
std::vector<PlannedAnswer> f2f_plan_answers(const Claim& claim, std::string_view justification,
                                            VeracityLabel target,
                                            std::span<const std::string> questions,
                                            const LlmBackend& backend,
                                            bool use_justification = true);

/// Importance in [0, 10] of question `focus_index` given the probe
/// justification. Parse failure is retried once, then 5.0 with a warning.
double f2f_weigh(const Claim& claim, std::string_view justification,
                 VeracityLabel original_verdict, std::span<const PlannedAnswer> all_qa,
                 std::size_t focus_index, const LlmBackend& backend,
                 Warnings* warnings = nullptr);

/// 1..max_u back-ticked queries; [question] with a warning when none.
std::vector<std::string> f2f_plan_queries(const Claim& claim, std::string_view question,
                                          const LlmBackend& backend, std::size_t max_u = 5,
                                          Warnings* warnings = nullptr);

/// Full Planner pass. `probe` supplies the justification and original verdict.
AttackPlan f2f_plan(const Claim& claim, const FactCheckReport& probe, VeracityLabel target,
                    std::size_t m, const LlmBackend& backend, const Fact2FictionOptions& options,
                    Warnings* warnings = nullptr);

/// Executor: for every sub-plan k and h < budget_k, one corpus (<= 30 words)
/// prefixed by a query drawn uniformly from S_k with a seeded RNG. Query draws
/// happen in (k, h) order before any generation, so concurrency does not
/// change the output.
PoisonSet f2f_execute(const AttackPlan& plan, const LlmBackend& backend, std::uint64_t rng_seed,
                      std::string attack_name = "fact2fiction", std::size_t concurrency = 1);

/// Attack name for a toggle combination ("fact2fiction" when all are on).
std::string fact2fiction_name(const Fact2FictionOptions& options);

}  // namespace factgauntlet
