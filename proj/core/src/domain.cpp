#include "factgauntlet/domain.hpp"

#include <cctype>

#include "factgauntlet/error.hpp"
#include "factgauntlet/text.hpp"

namespace factgauntlet {

namespace {

// Lowercase, '_'/'-' to space, drop punctuation other than '/', collapse runs
// of spaces.
std::string normalize_label_text(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (const char ch : text::trim(raw)) {
    auto c = static_cast<unsigned char>(ch);
    if (c == '_' || c == '-' || std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (!std::isalnum(c) && c != '/') continue;
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

}  // namespace

std::string_view to_string(VeracityLabel label) noexcept {
  switch (label) {
    case VeracityLabel::Supported: return "supported";
    case VeracityLabel::Refuted: return "refuted";
    case VeracityLabel::NotEnoughEvidence: return "not_enough_evidence";
    case VeracityLabel::ConflictingEvidence: return "conflicting_evidence";
  }
  return "supported";
}

std::string_view display_name(VeracityLabel label) noexcept {
  switch (label) {
    case VeracityLabel::Supported: return "Supported";
    case VeracityLabel::Refuted: return "Refuted";
    case VeracityLabel::NotEnoughEvidence: return "Not Enough Evidence";
    case VeracityLabel::ConflictingEvidence: return "Conflicting Evidence/Cherry-picking";
  }
  return "Supported";
}

std::optional<VeracityLabel> parse_label(std::string_view raw) {
  const std::string s = normalize_label_text(raw);
  if (s == "supported") return VeracityLabel::Supported;
  if (s == "refuted") return VeracityLabel::Refuted;
  if (s == "not enough evidence" || s == "not enough info" || s == "not enough information" ||
      s == "nei")
    return VeracityLabel::NotEnoughEvidence;
  if (s.starts_with("conflicting") || s == "cherry picking" || s == "cherrypicking")
    return VeracityLabel::ConflictingEvidence;
  return std::nullopt;
}

VeracityLabel label_from_string(std::string_view text) {
  if (auto label = parse_label(text)) return *label;
  throw ValidationError("unknown veracity label: '" + std::string(text) + "'");
}

VeracityLabel invert_label(VeracityLabel label) {
  switch (label) {
    case VeracityLabel::Supported: return VeracityLabel::Refuted;
    case VeracityLabel::Refuted: return VeracityLabel::Supported;
    default:
      throw ValidationError("invert_label: only supported/refuted can be inverted, got " +
                            std::string(to_string(label)));
  }
}

std::string_view to_string(OutcomeClass outcome) noexcept {
  switch (outcome) {
    case OutcomeClass::Inverted: return "inverted";
    case OutcomeClass::Degraded: return "degraded";
    case OutcomeClass::Unchanged: return "unchanged";
  }
  return "unchanged";
}

OutcomeClass outcome_from_string(std::string_view text) {
  if (text == "inverted") return OutcomeClass::Inverted;
  if (text == "degraded") return OutcomeClass::Degraded;
  if (text == "unchanged") return OutcomeClass::Unchanged;
  throw ValidationError("unknown outcome class: '" + std::string(text) + "'");
}

OutcomeClass classify_outcome(VeracityLabel gold, VeracityLabel post_verdict) {
  if (!is_targetable(gold))
    throw ValidationError("classify_outcome: gold label must be supported or refuted, got " +
                          std::string(to_string(gold)));
  if (post_verdict == gold) return OutcomeClass::Unchanged;
  if (post_verdict == invert_label(gold)) return OutcomeClass::Inverted;
  return OutcomeClass::Degraded;
}

void Claim::validate() const {
  if (id.empty()) throw ValidationError("claim id must not be empty");
  if (text::trim(text).empty()) throw ValidationError("claim '" + id + "' has empty text");
}

Evidence::Evidence(std::string id, std::string text, Provenance provenance,
                   std::optional<std::string> url)
    : id_(std::move(id)), text_(std::move(text)), provenance_(std::move(provenance)),
      url_(std::move(url)) {
  if (id_.empty()) throw ValidationError("evidence id must not be empty");
  if (text::trim(text_).empty())
    throw ValidationError("evidence '" + id_ + "' has empty text");
}

std::string malicious_evidence_id(std::string_view claim_id, std::string_view attack,
                                  std::size_t sub_question, std::size_t index) {
  std::string id(claim_id);
  id += "/mal/";
  id += attack;
  id += '/';
  id += std::to_string(sub_question);
  id += '/';
  id += std::to_string(index);
  return id;
}

void to_json(nlohmann::json& j, VeracityLabel label) { j = std::string(to_string(label)); }

void from_json(const nlohmann::json& j, VeracityLabel& label) {
  label = label_from_string(j.get<std::string>());
}

void to_json(nlohmann::json& j, OutcomeClass outcome) { j = std::string(to_string(outcome)); }

void from_json(const nlohmann::json& j, OutcomeClass& outcome) {
  outcome = outcome_from_string(j.get<std::string>());
}

void to_json(nlohmann::json& j, const Claim& claim) {
  j = nlohmann::json{{"id", claim.id}, {"text", claim.text}, {"gold_label", claim.gold_label}};
  if (claim.date) j["date"] = *claim.date;
  if (claim.speaker) j["speaker"] = *claim.speaker;
}

void from_json(const nlohmann::json& j, Claim& claim) {
  claim.id = j.at("id").get<std::string>();
  claim.text = j.at("text").get<std::string>();
  claim.gold_label = j.at("gold_label").get<VeracityLabel>();
  claim.date = j.contains("date") && !j["date"].is_null()
                   ? std::optional(j["date"].get<std::string>())
                   : std::nullopt;
  claim.speaker = j.contains("speaker") && !j["speaker"].is_null()
                      ? std::optional(j["speaker"].get<std::string>())
                      : std::nullopt;
  claim.validate();
}

void to_json(nlohmann::json& j, const Provenance& provenance) {
  if (!provenance.is_malicious()) {
    j = nlohmann::json{{"kind", "clean"}};
    return;
  }
  j = nlohmann::json{{"kind", "malicious"}, {"attack_name", provenance.attack_name}};
  if (provenance.sub_question_index) j["sub_question_index"] = *provenance.sub_question_index;
}

void from_json(const nlohmann::json& j, Provenance& provenance) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "clean") {
    provenance = Provenance::clean();
  } else if (kind == "malicious") {
    std::optional<std::size_t> k;
    if (j.contains("sub_question_index") && !j["sub_question_index"].is_null())
      k = j["sub_question_index"].get<std::size_t>();
    provenance = Provenance::malicious(j.at("attack_name").get<std::string>(), k);
  } else {
    throw ValidationError("unknown provenance kind: '" + kind + "'");
  }
}

void to_json(nlohmann::json& j, const Evidence& evidence) {
  j = nlohmann::json{
      {"id", evidence.id()}, {"text", evidence.text()}, {"provenance", evidence.provenance()}};
  if (evidence.url()) j["url"] = *evidence.url();
}

Evidence evidence_from_json(const nlohmann::json& j) {
  std::optional<std::string> url;
  if (j.contains("url") && !j["url"].is_null()) url = j["url"].get<std::string>();
  Provenance provenance;
  if (j.contains("provenance")) provenance = j["provenance"].get<Provenance>();
  return Evidence(j.at("id").get<std::string>(), j.at("text").get<std::string>(),
                  std::move(provenance), std::move(url));
}

}  // namespace factgauntlet
