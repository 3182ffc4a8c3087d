#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "factgauntlet/domain.hpp"
#include "factgauntlet/error.hpp"

namespace factgauntlet {

enum class TemplateId {
  Decompose,
  AnswerPlan,
  AnswerPlanUntargeted,  ///< answer planning ablation: no justification block
  ImportanceScore,
  QueryPlan,
  ExecutorCorpus,
  Disinformation,  ///< baseline attack corpus prompt
  SimpleVerdict,
  SubQuestionAnswer,
  Aggregate,
  Paraphrase,
};

/// Asset file stem, e.g. "answer_plan".
std::string_view asset_name(TemplateId id) noexcept;

/// Raw template text with `[SLOT]` placeholders.
std::string_view template_body(TemplateId id);

/// Slot names (without brackets) appearing in the body.
std::set<std::string> required_slots(TemplateId id);

using Bindings = std::map<std::string, std::string, std::less<>>;

class MissingSlotsError : public ValidationError {
 public:
  MissingSlotsError(TemplateId id, std::vector<std::string> missing);
  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  std::vector<std::string> missing_;
};

/// Substitutes every `[SLOT]` occurrence in one pass; bound values are not
/// re-scanned. Unused bindings are ignored.
std::string render_prompt(TemplateId id, const Bindings& bindings);

/// Replacement for [KEYWORD] in the answer-planning prompts:
/// "supports (the claim is true)" / "refutes (the claim is false)".
std::string_view answer_plan_keyword(VeracityLabel target);

/// Replacement for [KEYWORD] in the executor prompt: "supports" / "refutes".
std::string_view executor_keyword(VeracityLabel target);

}  // namespace factgauntlet
