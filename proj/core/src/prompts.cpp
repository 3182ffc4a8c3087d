#include "factgauntlet/prompts.hpp"

#include <cctype>

namespace factgauntlet {

namespace detail {
std::string_view prompt_asset(std::string_view name);
}

namespace {

// Finds `[NAME]` with NAME = [A-Z][A-Z0-9_]* starting at or after `from`.
// Returns npos when none is left; `name` receives the slot name.
std::size_t next_slot(std::string_view body, std::size_t from, std::string_view& name) {
  while (true) {
    const auto open = body.find('[', from);
    if (open == std::string_view::npos) return open;
    std::size_t i = open + 1;
    if (i < body.size() && std::isupper(static_cast<unsigned char>(body[i]))) {
      ++i;
      while (i < body.size() && (std::isupper(static_cast<unsigned char>(body[i])) ||
                                 std::isdigit(static_cast<unsigned char>(body[i])) ||
                                 body[i] == '_'))
        ++i;
      if (i < body.size() && body[i] == ']') {
        name = body.substr(open + 1, i - open - 1);
        return open;
      }
    }
    from = open + 1;
  }
}

}  // namespace

std::string_view asset_name(TemplateId id) noexcept {
  switch (id) {
    case TemplateId::Decompose: return "decompose";
    case TemplateId::AnswerPlan: return "answer_plan";
    case TemplateId::AnswerPlanUntargeted: return "answer_plan_untargeted";
    case TemplateId::ImportanceScore: return "importance_score";
    case TemplateId::QueryPlan: return "query_plan";
    case TemplateId::ExecutorCorpus: return "executor_corpus";
    case TemplateId::Disinformation: return "disinformation";
    case TemplateId::SimpleVerdict: return "simple_verdict";
    case TemplateId::SubQuestionAnswer: return "sub_question_answer";
    case TemplateId::Aggregate: return "aggregate";
    case TemplateId::Paraphrase: return "paraphrase";
  }
  return "";
}

std::string_view template_body(TemplateId id) {
  const auto body = detail::prompt_asset(asset_name(id));
  if (body.empty()) throw Error("prompt asset missing: " + std::string(asset_name(id)));
  return body;
}

std::set<std::string> required_slots(TemplateId id) {
  const auto body = template_body(id);
  std::set<std::string> slots;
  std::string_view name;
  for (auto pos = next_slot(body, 0, name); pos != std::string_view::npos;
       pos = next_slot(body, pos + name.size() + 2, name))
    slots.emplace(name);
  return slots;
}

MissingSlotsError::MissingSlotsError(TemplateId id, std::vector<std::string> missing)
    : ValidationError([&] {
        std::string msg = "template '" + std::string(asset_name(id)) + "' is missing bindings:";
        for (const auto& m : missing) msg += " " + m;
        return msg;
      }()),
      missing_(std::move(missing)) {}

std::string render_prompt(TemplateId id, const Bindings& bindings) {
  const auto body = template_body(id);
  std::vector<std::string> missing;
  for (const auto& slot : required_slots(id)) {
    if (!bindings.contains(slot)) missing.push_back(slot);
  }
  if (!missing.empty()) throw MissingSlotsError(id, std::move(missing));

  std::string out;
  out.reserve(body.size() + 256);
  std::size_t cursor = 0;
  std::string_view name;
  for (auto pos = next_slot(body, 0, name); pos != std::string_view::npos;
       pos = next_slot(body, cursor, name)) {
    out.append(body.substr(cursor, pos - cursor));
    out += bindings.find(name)->second;
    cursor = pos + name.size() + 2;
  }
  out.append(body.substr(cursor));
  return out;
}

std::string_view answer_plan_keyword(VeracityLabel target) {
  switch (target) {
    case VeracityLabel::Supported: return "supports (the claim is true)";
    case VeracityLabel::Refuted: return "refutes (the claim is false)";
    default: throw ValidationError("attack target must be supported or refuted");
  }
}

std::string_view executor_keyword(VeracityLabel target) {
  switch (target) {
    case VeracityLabel::Supported: return "supports";
    case VeracityLabel::Refuted: return "refutes";
    default: throw ValidationError("attack target must be supported or refuted");
  }
}

}  // namespace factgauntlet
