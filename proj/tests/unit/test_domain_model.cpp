#include <doctest.h>

#include "factgauntlet/domain.hpp"
#include "factgauntlet/error.hpp"
#include "factgauntlet/text.hpp"

using namespace factgauntlet;

namespace {
constexpr VeracityLabel kAll[] = {VeracityLabel::Supported, VeracityLabel::Refuted,
                                  VeracityLabel::NotEnoughEvidence,
                                  VeracityLabel::ConflictingEvidence};
}

TEST_CASE("invert_label swaps supported and refuted") {
  CHECK(invert_label(VeracityLabel::Supported) == VeracityLabel::Refuted);
  CHECK(invert_label(VeracityLabel::Refuted) == VeracityLabel::Supported);
  CHECK_THROWS_AS(invert_label(VeracityLabel::NotEnoughEvidence), ValidationError);
  CHECK_THROWS_AS(invert_label(VeracityLabel::ConflictingEvidence), ValidationError);
}

TEST_CASE("invert_label is an involution on targetable labels") {
  for (auto l : {VeracityLabel::Supported, VeracityLabel::Refuted})
    CHECK(invert_label(invert_label(l)) == l);
}

TEST_CASE("classify_outcome") {
  CHECK(classify_outcome(VeracityLabel::Supported, VeracityLabel::Refuted) ==
        OutcomeClass::Inverted);
  CHECK(classify_outcome(VeracityLabel::Supported, VeracityLabel::NotEnoughEvidence) ==
        OutcomeClass::Degraded);
  CHECK(classify_outcome(VeracityLabel::Supported, VeracityLabel::ConflictingEvidence) ==
        OutcomeClass::Degraded);
  CHECK(classify_outcome(VeracityLabel::Refuted, VeracityLabel::Refuted) ==
        OutcomeClass::Unchanged);
  CHECK_THROWS_AS(classify_outcome(VeracityLabel::NotEnoughEvidence, VeracityLabel::Supported),
                  ValidationError);

  for (auto g : {VeracityLabel::Supported, VeracityLabel::Refuted}) {
    CHECK(classify_outcome(g, invert_label(g)) == OutcomeClass::Inverted);
    CHECK(classify_outcome(g, g) == OutcomeClass::Unchanged);
    for (auto post : kAll) {
      const auto o = classify_outcome(g, post);
      CHECK(is_failure(o) == (post != g));
    }
  }
}

TEST_CASE("labels serialize to canonical names and round-trip") {
  CHECK(to_string(VeracityLabel::Supported) == "supported");
  CHECK(to_string(VeracityLabel::Refuted) == "refuted");
  CHECK(to_string(VeracityLabel::NotEnoughEvidence) == "not_enough_evidence");
  CHECK(to_string(VeracityLabel::ConflictingEvidence) == "conflicting_evidence");
  for (auto l : kAll) {
    const nlohmann::json j = l;
    CHECK(j.get<VeracityLabel>() == l);
    CHECK(label_from_string(to_string(l)) == l);
    CHECK(parse_label(display_name(l)) == l);
  }
}

TEST_CASE("parse_label accepts surface forms") {
  CHECK(parse_label("Conflicting/Cherry-picking") == VeracityLabel::ConflictingEvidence);
  CHECK(parse_label("Conflicting Evidence/Cherrypicking") == VeracityLabel::ConflictingEvidence);
  CHECK(parse_label("Not Enough Evidence") == VeracityLabel::NotEnoughEvidence);
  CHECK(parse_label("  SUPPORTED  ") == VeracityLabel::Supported);
  CHECK_FALSE(parse_label("maybe").has_value());
  CHECK_THROWS_AS(label_from_string("maybe"), ValidationError);
}

TEST_CASE("only supported and refuted are targetable") {
  CHECK(is_targetable(VeracityLabel::Supported));
  CHECK(is_targetable(VeracityLabel::Refuted));
  CHECK_FALSE(is_targetable(VeracityLabel::NotEnoughEvidence));
  CHECK_FALSE(is_targetable(VeracityLabel::ConflictingEvidence));
}

TEST_CASE("outcome names round-trip") {
  for (auto o : {OutcomeClass::Inverted, OutcomeClass::Degraded, OutcomeClass::Unchanged}) {
    const nlohmann::json j = o;
    CHECK(j.get<OutcomeClass>() == o);
  }
  CHECK_THROWS(outcome_from_string("sideways"));
}

TEST_CASE("claim validation and json") {
  Claim c{"c1", "The sky is green", VeracityLabel::Refuted, "2020-01-02", "someone"};
  const nlohmann::json j = c;
  CHECK(j["id"] == "c1");
  CHECK(j["text"] == "The sky is green");
  CHECK(j["gold_label"] == "refuted");
  CHECK(j["date"] == "2020-01-02");
  CHECK(j.get<Claim>() == c);

  Claim bare{"c2", "x", VeracityLabel::Supported, std::nullopt, std::nullopt};
  const nlohmann::json jb = bare;
  CHECK_FALSE(jb.contains("date"));
  CHECK(jb.get<Claim>() == bare);

  CHECK_THROWS_AS((Claim{"", "x"}.validate()), ValidationError);
  CHECK_THROWS_AS((Claim{"id", "   "}.validate()), ValidationError);
}

TEST_CASE("evidence invariants and json") {
  CHECK_THROWS_AS(Evidence("", "text"), ValidationError);
  CHECK_THROWS_AS(Evidence("e", " "), ValidationError);

  const Evidence clean("e1", "clean text", Provenance::clean(), "https://example.org");
  const Evidence mal("c/mal/fact2fiction/2/0", "bad text",
                     Provenance::malicious("fact2fiction", 2));
  CHECK_FALSE(clean.is_malicious());
  CHECK(mal.is_malicious());
  CHECK(mal.provenance().sub_question_index == 2u);

  for (const auto& e : {clean, mal}) {
    const nlohmann::json j = e;
    CHECK(j.get<Evidence>() == e);
  }
  const nlohmann::json jm = mal;
  CHECK(jm["provenance"]["kind"] == "malicious");
  CHECK(jm["provenance"]["attack_name"] == "fact2fiction");

  // Missing provenance means clean evidence (dataset rows).
  const auto loaded = nlohmann::json{{"id", "x"}, {"text", "y"}}.get<Evidence>();
  CHECK_FALSE(loaded.is_malicious());
}

TEST_CASE("malicious evidence ids follow claim/mal/attack/k/h") {
  CHECK(malicious_evidence_id("c7", "naive", 0, 3) == "c7/mal/naive/0/3");
  CHECK(malicious_evidence_id("c7", "fact2fiction", 2, 0) == "c7/mal/fact2fiction/2/0");
}

TEST_CASE("text helpers") {
  CHECK(text::truncate_words("a b  c d", 2) == "a b");
  CHECK(text::truncate_words("  a b ", 5) == "a b");
  CHECK(text::word_count("one two\tthree\nfour") == 4);
  CHECK(text::tokenize("Hello, World! 42x") == std::vector<std::string>{"hello", "world", "42x"});
  CHECK(text::file_safe("a/b\\c") != "a/b\\c");
  CHECK(text::file_safe("a/b").find('/') == std::string::npos);
  const std::vector<std::uint8_t> bytes{0, 1, 2, 250, 255};
  CHECK(text::base64_decode(text::base64_encode(bytes)) == bytes);
  CHECK(text::base64_encode(std::vector<std::uint8_t>{'M', 'a', 'n'}) == "TWFu");
  CHECK_THROWS(text::base64_decode("!!!"));
  CHECK(text::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(text::hex64(255) == "00000000000000ff");
}
