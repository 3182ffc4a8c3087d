#include "factgauntlet/payload.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>

#include "factgauntlet/error.hpp"
#include "factgauntlet/text.hpp"

namespace factgauntlet {

namespace {

std::optional<nlohmann::json> try_parse(std::string_view s) {
  auto j = nlohmann::json::parse(s, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !(j.is_object() || j.is_array())) return std::nullopt;
  return j;
}

std::optional<std::string_view> fenced_block(std::string_view s) {
  const auto open = s.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  auto body_start = s.find('\n', open + 3);
  if (body_start == std::string_view::npos) return std::nullopt;
  ++body_start;
  const auto close = s.find("```", body_start);
  if (close == std::string_view::npos) return s.substr(body_start);
  return s.substr(body_start, close - body_start);
}

std::string_view strip_decoration(std::string_view s) {
  s = text::trim(s);
  bool changed = true;
  while (changed && !s.empty()) {
    changed = false;
    for (const std::string_view wrap : {"**", "__", "\"", "'", "`", "*"}) {
      if (s.size() >= 2 * wrap.size() && s.starts_with(wrap) && s.ends_with(wrap)) {
        s = text::trim(s.substr(wrap.size(), s.size() - 2 * wrap.size()));
        changed = true;
      }
    }
    // Typographic quotes.
    for (const std::string_view open : {"\xE2\x80\x9C"}) {
      const std::string_view close = "\xE2\x80\x9D";
      if (s.starts_with(open) && s.ends_with(close) && s.size() >= open.size() + close.size()) {
        s = text::trim(s.substr(open.size(), s.size() - open.size() - close.size()));
        changed = true;
      }
    }
  }
  return s;
}

// "1. text", "1) text", "Q1: text", "- text", "* text". Returns the item text.
std::optional<std::string_view> enumerated_item(std::string_view line, bool allow_bullets) {
  line = text::trim(line);
  // Leading markdown emphasis around the marker, e.g. "**1.** text".
  while (line.starts_with("**")) line = text::trim(line.substr(2));
  std::size_t i = 0;
  if (i < line.size() && (line[i] == 'Q' || line[i] == 'q') && i + 1 < line.size() &&
      std::isdigit(static_cast<unsigned char>(line[i + 1])))
    ++i;
  const std::size_t digits_start = i;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i > digits_start) {
    if (i < line.size() && (line[i] == '.' || line[i] == ')' || line[i] == ':')) {
      ++i;
      while (line.substr(i).starts_with("**")) i += 2;
      // "1.5 million" is prose, not a list marker.
      if (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])) == 0)
        return std::nullopt;
      auto rest = strip_decoration(line.substr(i));
      if (!rest.empty()) return rest;
    }
    return std::nullopt;
  }
  if (allow_bullets && !line.empty() && (line[0] == '-' || line[0] == '*') && line.size() > 2 &&
      line[1] == ' ') {
    auto rest = strip_decoration(line.substr(2));
    if (!rest.empty()) return rest;
  }
  return std::nullopt;
}

std::vector<std::string_view> split_lines(std::string_view s) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = s.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(s.substr(start));
      break;
    }
    lines.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

}  // namespace

nlohmann::json extract_json(std::string_view raw) {
  const auto s = text::trim(raw);
  if (auto j = try_parse(s)) return *j;
  if (auto block = fenced_block(s)) {
    if (auto j = try_parse(text::trim(*block))) return *j;
  }
  for (const auto& [open, close] : {std::pair{'{', '}'}, std::pair{'[', ']'}}) {
    const auto first = s.find(open);
    const auto last = s.rfind(close);
    if (first != std::string_view::npos && last != std::string_view::npos && last > first) {
      if (auto j = try_parse(s.substr(first, last - first + 1))) return *j;
    }
  }
  throw ParseError("no JSON payload found in model output", std::string(raw));
}

AnswerPlanResponse parse_answer_plan(std::string_view text) {
  const auto j = extract_json(text);
  const nlohmann::json* list = nullptr;
  if (j.is_array()) {
    list = &j;
  } else if (j.contains("answers") && j["answers"].is_array()) {
    list = &j["answers"];
  }
  if (!list) throw ParseError("answer plan JSON lacks an 'answers' array", std::string(text));

  AnswerPlanResponse out;
  for (const auto& item : *list) {
    if (!item.is_object() || !item.contains("answer") || !item["answer"].is_string())
      throw ParseError("answer plan item lacks a string 'answer'", std::string(text));
    PlannedAnswer a;
    a.question = item.value("question", std::string());
    a.answer = item["answer"].get<std::string>();
    a.reason = item.contains("reason") && item["reason"].is_string()
                   ? item["reason"].get<std::string>()
                   : std::string();
    if (text::trim(a.answer).empty())
      throw ParseError("answer plan item has an empty answer", std::string(text));
    out.answers.push_back(std::move(a));
  }
  return out;
}

ImportanceResponse parse_importance(std::string_view text) {
  const auto j = extract_json(text);
  if (!j.is_object() || !j.contains("importance_score"))
    throw ParseError("importance JSON lacks 'importance_score'", std::string(text));
  const auto& raw_score = j["importance_score"];
  double score = 0.0;
  if (raw_score.is_number()) {
    score = raw_score.get<double>();
  } else if (raw_score.is_string()) {
    try {
      std::size_t used = 0;
      const auto str = raw_score.get<std::string>();
      score = std::stod(str, &used);
    } catch (const std::exception&) {
      throw ParseError("importance_score is not numeric", std::string(text));
    }
  } else {
    throw ParseError("importance_score is not numeric", std::string(text));
  }
  if (!std::isfinite(score)) throw ParseError("importance_score is not finite", std::string(text));

  ImportanceResponse out;
  out.importance_score = std::clamp(score, 0.0, 10.0);
  out.clamped = out.importance_score != score;
  if (j.contains("reasoning") && j["reasoning"].is_string())
    out.reasoning = j["reasoning"].get<std::string>();
  return out;
}

StructuredPayload parse_json_payload(std::string_view text, SchemaId schema) {
  switch (schema) {
    case SchemaId::AnswerPlanResponse: return parse_answer_plan(text);
    case SchemaId::ImportanceResponse: return parse_importance(text);
  }
  throw ValidationError("unknown schema id");
}

std::vector<std::string> extract_backticked(std::string_view text, std::size_t cap) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size() && out.size() < cap) {
    if (text[i] != '`') {
      ++i;
      continue;
    }
    if (text.substr(i).starts_with("```")) {
      // Code fence marker: skip the whole run of back-ticks.
      while (i < text.size() && text[i] == '`') ++i;
      continue;
    }
    const auto close = text.find('`', i + 1);
    if (close == std::string_view::npos) break;
    const auto inner = text::trim(text.substr(i + 1, close - i - 1));
    if (!inner.empty() && inner.find('\n') == std::string_view::npos &&
        std::find(out.begin(), out.end(), inner) == out.end())
      out.emplace_back(inner);
    i = close + 1;
  }
  return out;
}

std::vector<std::string> extract_enumerated_questions(std::string_view text, std::size_t cap) {
  const auto lines = split_lines(text);

  // Last heading line mentioning "question" that is followed by list items.
  std::optional<std::size_t> heading;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (enumerated_item(lines[i], true)) continue;
    if (!text::contains_icase(lines[i], "question")) continue;
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      if (enumerated_item(lines[j], true)) {
        heading = i;
        break;
      }
    }
  }

  std::vector<std::string> out;
  const auto collect = [&](std::size_t from, bool allow_bullets) {
    bool started = false;
    for (std::size_t i = from; i < lines.size() && out.size() < cap; ++i) {
      const auto line = text::trim(lines[i]);
      if (line.empty()) continue;
      if (auto item = enumerated_item(line, allow_bullets)) {
        out.emplace_back(*item);
        started = true;
      } else if (started) {
        break;
      }
    }
  };

  if (heading) {
    collect(*heading + 1, true);
  } else {
    // Start of the last block of numbered lines.
    std::optional<std::size_t> block_start;
    bool in_block = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto line = text::trim(lines[i]);
      if (line.empty()) continue;
      const bool item = enumerated_item(line, false).has_value();
      if (item && !in_block) block_start = i;
      in_block = item;
    }
    if (block_start) collect(*block_start, false);
  }
  return out;
}

}  // namespace factgauntlet
