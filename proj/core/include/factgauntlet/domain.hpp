#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace factgauntlet {

/// The four AVeriTeC verdicts.
enum class VeracityLabel {
  Supported,
  Refuted,
  NotEnoughEvidence,
  ConflictingEvidence,
};

/// Canonical wire name: "supported", "refuted", "not_enough_evidence",
/// "conflicting_evidence".
std::string_view to_string(VeracityLabel label) noexcept;

/// Human-facing name used inside prompts ("Supported", "Not Enough Evidence", ...).
std::string_view display_name(VeracityLabel label) noexcept;

/// Accepts the canonical wire names and the surface forms found in datasets
/// and model output ("Not Enough Evidence", "Conflicting Evidence/Cherrypicking",
/// "Conflicting/Cherry-picking", ...). Case-insensitive.
std::optional<VeracityLabel> parse_label(std::string_view text);

/// Like parse_label, but throws ValidationError on unknown input.
VeracityLabel label_from_string(std::string_view text);

/// Only Supported and Refuted claims can be attacked.
constexpr bool is_targetable(VeracityLabel label) noexcept {
  return label == VeracityLabel::Supported || label == VeracityLabel::Refuted;
}

/// Supported <-> Refuted. Throws ValidationError for the other two labels.
VeracityLabel invert_label(VeracityLabel label);

enum class OutcomeClass {
  Inverted,   ///< post verdict is exactly the opposite of gold
  Degraded,   ///< wrong, but not inverted (NEI / conflicting)
  Unchanged,  ///< still equal to gold
};

std::string_view to_string(OutcomeClass outcome) noexcept;
OutcomeClass outcome_from_string(std::string_view text);

OutcomeClass classify_outcome(VeracityLabel gold, VeracityLabel post_verdict);

/// Counts toward the system fail rate (Inverted or Degraded).
constexpr bool is_failure(OutcomeClass outcome) noexcept {
  return outcome != OutcomeClass::Unchanged;
}

struct Claim {
  std::string id;
  std::string text;
  VeracityLabel gold_label = VeracityLabel::Supported;
  std::optional<std::string> date;
  std::optional<std::string> speaker;

  bool targetable() const noexcept { return is_targetable(gold_label); }
  /// Throws ValidationError when id or text is empty.
  void validate() const;

  friend bool operator==(const Claim&, const Claim&) = default;
};

struct Provenance {
  enum class Kind { Clean, Malicious };

  Kind kind = Kind::Clean;
  std::string attack_name;                        // empty for clean evidence
  std::optional<std::size_t> sub_question_index;  // Fact2Fiction only

  static Provenance clean() { return {}; }
  static Provenance malicious(std::string attack,
                              std::optional<std::size_t> sub_question = std::nullopt) {
    return {Kind::Malicious, std::move(attack), sub_question};
  }

  bool is_malicious() const noexcept { return kind == Kind::Malicious; }

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// One snippet of a claim's knowledge base. Immutable once built.
class Evidence {
 public:
  /// Throws ValidationError on empty id or text.
  Evidence(std::string id, std::string text, Provenance provenance = Provenance::clean(),
           std::optional<std::string> url = std::nullopt);

  const std::string& id() const noexcept { return id_; }
  const std::string& text() const noexcept { return text_; }
  const Provenance& provenance() const noexcept { return provenance_; }
  const std::optional<std::string>& url() const noexcept { return url_; }
  bool is_malicious() const noexcept { return provenance_.is_malicious(); }

  friend bool operator==(const Evidence&, const Evidence&) = default;

 private:
  std::string id_;
  std::string text_;
  Provenance provenance_;
  std::optional<std::string> url_;
};

/// `{claim_id}/mal/{attack}/{k}/{h}`. Baseline attacks use k = 0.
std::string malicious_evidence_id(std::string_view claim_id, std::string_view attack,
                                  std::size_t sub_question, std::size_t index);

void to_json(nlohmann::json& j, VeracityLabel label);
void from_json(const nlohmann::json& j, VeracityLabel& label);
void to_json(nlohmann::json& j, OutcomeClass outcome);
void from_json(const nlohmann::json& j, OutcomeClass& outcome);
void to_json(nlohmann::json& j, const Claim& claim);
void from_json(const nlohmann::json& j, Claim& claim);
void to_json(nlohmann::json& j, const Provenance& provenance);
void from_json(const nlohmann::json& j, Provenance& provenance);
void to_json(nlohmann::json& j, const Evidence& evidence);
Evidence evidence_from_json(const nlohmann::json& j);

}  // namespace factgauntlet

namespace nlohmann {
template <>
struct adl_serializer<factgauntlet::Evidence> {
  static factgauntlet::Evidence from_json(const json& j) {
    return factgauntlet::evidence_from_json(j);
  }
  static void to_json(json& j, const factgauntlet::Evidence& e) { factgauntlet::to_json(j, e); }
};
}  // namespace nlohmann
