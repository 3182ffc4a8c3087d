#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace factgauntlet {

enum class SchemaId { AnswerPlanResponse, ImportanceResponse };

struct PlannedAnswer {
  std::string question;
  std::string answer;
  std::string reason;
};

struct AnswerPlanResponse {
  std::vector<PlannedAnswer> answers;
};

struct ImportanceResponse {
  double importance_score = 0.0;  ///< within [0, 10]
  std::string reasoning;
  bool clamped = false;  ///< the model's score was outside [0, 10]
};

using StructuredPayload = std::variant<AnswerPlanResponse, ImportanceResponse>;

/// Finds and parses the JSON value in model output. Accepts bare JSON,
/// ```json fenced blocks, and JSON embedded in surrounding prose.
/// Throws ParseError carrying the raw text.
nlohmann::json extract_json(std::string_view text);

/// Throws ParseError when the text is unparseable or fails the schema.
StructuredPayload parse_json_payload(std::string_view text, SchemaId schema);
AnswerPlanResponse parse_answer_plan(std::string_view text);
ImportanceResponse parse_importance(std::string_view text);

/// Strings wrapped in single back-ticks, in order, exact duplicates removed,
/// at most `cap`.
std::vector<std::string> extract_backticked(std::string_view text, std::size_t cap = 5);

/// Items of the final enumerated "Questions" list in a decomposition reply
/// (at most `cap`). Falls back to the last block of enumerated lines when no
/// Questions heading precedes one.
std::vector<std::string> extract_enumerated_questions(std::string_view text,
                                                      std::size_t cap = 10);

}  // namespace factgauntlet
