#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "factgauntlet/domain.hpp"
#include "factgauntlet/knowledge_base.hpp"
#include "factgauntlet/llm.hpp"

namespace factgauntlet {

struct DroppedEvidence {
  std::string id;
  std::string reason;  ///< defense reason code, e.g. "cluster", "perplexity"

  friend bool operator==(const DroppedEvidence&, const DroppedEvidence&) = default;
};

/// One retrieve call as seen by the victim, after any defense filtering.
struct RetrievalEvent {
  std::string query;
  std::vector<std::string> retrieved_ids;  ///< rank order
  std::vector<bool> malicious;             ///< parallel to retrieved_ids
  std::vector<DroppedEvidence> dropped;

  std::size_t malicious_count() const noexcept;

  friend bool operator==(const RetrievalEvent&, const RetrievalEvent&) = default;
};

struct SubQuestionRecord {
  std::string question;
  std::vector<std::string> queries;
  std::vector<std::string> retrieved_ids;  ///< union over queries, first-seen order
  std::string answer;

  friend bool operator==(const SubQuestionRecord&, const SubQuestionRecord&) = default;
};

struct FactCheckReport {
  std::string claim_id;
  VeracityLabel verdict = VeracityLabel::NotEnoughEvidence;
  std::string justification;
  std::vector<SubQuestionRecord> sub_records;  ///< empty for the simple victim
  std::vector<RetrievalEvent> retrieval_log;
  std::vector<std::string> warnings;

  std::size_t retrieved_total() const noexcept;
  std::size_t retrieved_malicious() const noexcept;

  friend bool operator==(const FactCheckReport&, const FactCheckReport&) = default;
};

void to_json(nlohmann::json& j, const DroppedEvidence& d);
void from_json(const nlohmann::json& j, DroppedEvidence& d);
void to_json(nlohmann::json& j, const RetrievalEvent& e);
void from_json(const nlohmann::json& j, RetrievalEvent& e);
void to_json(nlohmann::json& j, const SubQuestionRecord& r);
void from_json(const nlohmann::json& j, SubQuestionRecord& r);
void to_json(nlohmann::json& j, const FactCheckReport& r);
void from_json(const nlohmann::json& j, FactCheckReport& r);

/// Post-retrieval hook used by defenses. Must only remove hits and keep the
/// order of the survivors.
class RetrievalGuard {
 public:
  struct Outcome {
    std::vector<RetrievalHit> kept;
    std::vector<DroppedEvidence> dropped;
  };

  virtual ~RetrievalGuard() = default;
  virtual Outcome filter(const KnowledgeBase& kb, std::span<const RetrievalHit> hits) const = 0;
};

enum class VictimKind { Simple, Agentic };

std::string_view to_string(VictimKind kind) noexcept;
VictimKind victim_from_string(std::string_view name);

struct VictimOptions {
  std::size_t k = 5;
  std::size_t max_questions = 10;
};

/// What a check reads. Nothing here is mutated.
struct VictimContext {
  const KnowledgeBase& kb;
  const Embedder& embedder;
  const LlmBackend& backend;
  const RetrievalGuard* guard = nullptr;
};

/// Case-insensitive match of the last `VERDICT:` line. Throws ParseError.
VeracityLabel parse_verdict(std::string_view text);

/// Naive RAG: one retrieval with the claim text, one verdict completion.
FactCheckReport simple_check(const Claim& claim, const VictimContext& ctx,
                             const VictimOptions& options = {});

/// Decompose -> per question (plan queries -> retrieve -> answer) -> aggregate.
FactCheckReport agentic_check(const Claim& claim, const VictimContext& ctx,
                              const VictimOptions& options = {});

FactCheckReport run_victim(VictimKind kind, const Claim& claim, const VictimContext& ctx,
                           const VictimOptions& options = {});

}  // namespace factgauntlet
