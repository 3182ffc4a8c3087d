#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "factgauntlet/embedding.hpp"
#include "factgauntlet/error.hpp"
#include "factgauntlet/knowledge_base.hpp"
#include "test_support.hpp"

using namespace factgauntlet;
using fgtest::entry;

namespace {

std::vector<std::string> ids(const std::vector<Evidence>& evs) {
  std::vector<std::string> out;
  for (const auto& e : evs) out.push_back(e.id());
  return out;
}

KnowledgeBase one_dim_kb() {
  return KnowledgeBase("c", 1,
                       {entry("a", {3}), entry("b", {1}), entry("c", {-2}), entry("d", {5}),
                        entry("e", {0.5}), entry("f", {10})});
}

}  // namespace

TEST_CASE("embedding vectors reject empty and non-finite input") {
  CHECK_THROWS_AS(EmbeddingVector({}), ValidationError);
  CHECK_THROWS_AS(EmbeddingVector({1.0, NAN}), ValidationError);
  CHECK_THROWS_AS(EmbeddingVector({INFINITY}), ValidationError);
  CHECK(EmbeddingVector({1.0, 2.0}).dim() == 2);
}

TEST_CASE("euclidean distance") {
  const std::vector<double> a{0, 0}, b{3, 4};
  CHECK(euclidean_distance(a, b) == doctest::Approx(5.0));
  CHECK(squared_distance(a, b) == doctest::Approx(25.0));
}

TEST_CASE("hash embedder is deterministic and shaped") {
  const HashEmbedder e8(8, 1);
  CHECK(e8.embed("abc") == e8.embed("abc"));
  CHECK(e8.embed("abc").dim() == 8);
  CHECK(e8.dim() == 8);

  const HashEmbedder big(4096, 7);
  // Same token set, different order and multiplicity: same vector.
  CHECK(big.embed("red apple tree") == big.embed("Tree, APPLE red red"));
  CHECK_FALSE(big.embed("red apple tree") == big.embed("red apple bush"));

  const auto v = big.embed("one two three");
  double norm = 0;
  for (double x : v.values()) norm += x * x;
  CHECK(norm == doctest::Approx(1.0));

  CHECK_THROWS_AS(big.embed(""), ValidationError);
  // Seeds change bucket placement.
  const HashEmbedder other(4096, 8);
  CHECK_FALSE(big.embed("one two three") == other.embed("one two three"));
}

TEST_CASE("embedding base64 round trip is float32 exact") {
  const EmbeddingVector v({0.5, -1.25, 3.0});
  CHECK(decode_embedding(encode_embedding(v)) == v);
  const EmbeddingVector w({0.1});
  CHECK(decode_embedding(encode_embedding(w))[0] == static_cast<double>(0.1f));
}

TEST_CASE("retrieve on the one-dimensional example") {
  const auto kb = one_dim_kb();
  CHECK(ids(retrieve(kb, EmbeddingVector({0.0}), 5)) ==
        std::vector<std::string>{"e", "b", "c", "a", "d"});
}

TEST_CASE("retrieve with k beyond size returns everything sorted") {
  const auto kb = one_dim_kb();
  CHECK(ids(retrieve(kb, EmbeddingVector({0.0}), 100)) ==
        std::vector<std::string>{"e", "b", "c", "a", "d", "f"});
}

TEST_CASE("retrieve ties break by evidence id") {
  const KnowledgeBase kb("c", 1, {entry("x2", {1}), entry("x1", {-1})});
  CHECK(ids(retrieve(kb, EmbeddingVector({0.0}), 2)) == std::vector<std::string>{"x1", "x2"});
}

TEST_CASE("retrieve edge cases") {
  const KnowledgeBase empty("c", 3);
  CHECK(retrieve(empty, EmbeddingVector({0.0, 0.0, 0.0}), 5).empty());
  const auto kb = one_dim_kb();
  CHECK_THROWS_AS(retrieve(kb, EmbeddingVector({0.0, 1.0}), 5), ValidationError);
  CHECK_THROWS_AS(retrieve(kb, EmbeddingVector({0.0}), 0), ValidationError);
}

TEST_CASE("search distances are non-decreasing and calls are pure") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  std::vector<KbEntry> entries;
  for (int i = 0; i < 200; ++i)
    entries.push_back(entry("e" + std::to_string(i), {n01(rng), n01(rng), n01(rng)}));
  const KnowledgeBase kb("c", 3, entries);
  const EmbeddingVector q({0.1, 0.2, 0.3});
  const auto hits = search(kb, q, 50);
  REQUIRE(hits.size() == 50);
  for (std::size_t i = 1; i < hits.size(); ++i) CHECK(hits[i - 1].distance <= hits[i].distance);
  const auto again = search(kb, q, 50);
  for (std::size_t i = 0; i < hits.size(); ++i) CHECK(hits[i].index == again[i].index);
}

TEST_CASE("knowledge base invariants") {
  CHECK_THROWS_AS(KnowledgeBase("c", 1, {entry("a", {1}), entry("a", {2})}), ValidationError);
  CHECK_THROWS_AS(KnowledgeBase("c", 1, {entry("a", {1}), entry("b", {1, 2})}), ValidationError);
  const KnowledgeBase kb("c", 1, {entry("a", {1}), entry("m", {2}, true)});
  CHECK(kb.clean_count() == 1);
  CHECK(kb.malicious_count() == 1);
  CHECK(kb.contains("m"));
  CHECK(kb.at("a").embedding[0] == 1.0);
  CHECK_THROWS_AS(kb.at("zzz"), ValidationError);
}

TEST_CASE("inject") {
  const HashEmbedder emb(64, 0);
  std::vector<std::pair<std::string, std::string>> docs;
  for (int i = 0; i < 100; ++i)
    docs.push_back({"e" + std::to_string(i), "clean document number " + std::to_string(i)});
  const auto kb = fgtest::make_kb("c", docs, emb);

  SUBCASE("empty poison is the identity") {
    const auto same = inject(kb, {}, emb);
    REQUIRE(same.size() == kb.size());
    for (std::size_t i = 0; i < kb.size(); ++i) {
      CHECK(same.entries()[i].evidence == kb.entries()[i].evidence);
      CHECK(same.entries()[i].embedding == kb.entries()[i].embedding);
    }
  }

  SUBCASE("cardinality and immutability") {
    std::vector<Evidence> poison;
    for (int h = 0; h < 8; ++h)
      poison.emplace_back(malicious_evidence_id("c", "naive", 0, h), "poison text " + std::to_string(h),
                          Provenance::malicious("naive", 0));
    const auto poisoned = inject(kb, poison, emb);
    CHECK(poisoned.size() == 108);
    CHECK(poisoned.malicious_count() == 8);
    CHECK(poisoned.clean_count() == 100);
    CHECK(kb.size() == 100);
    for (std::size_t i = 0; i < kb.size(); ++i)
      CHECK(poisoned.entries()[i].embedding == kb.entries()[i].embedding);

    // A malicious text queried with its own embedding ranks first.
    const auto top = retrieve(poisoned, emb.embed(poison[3].text()), 1);
    REQUIRE(top.size() == 1);
    CHECK(top[0].id() == poison[3].id());
  }

  SUBCASE("errors") {
    const std::vector<Evidence> collide{Evidence("e1", "x", Provenance::malicious("naive"))};
    CHECK_THROWS_AS(inject(kb, collide, emb), ValidationError);
    const std::vector<Evidence> clean{Evidence("new", "x")};
    CHECK_THROWS_AS(inject(kb, clean, emb), ValidationError);
  }
}

TEST_CASE("knowledge base persistence") {
  fgtest::TempDir dir;
  const HashEmbedder emb(32, 5);
  const auto kb = fgtest::make_kb("c", {{"a", "alpha beta"}, {"b", "gamma delta"}}, emb);
  save_knowledge_base(kb, dir / "c.jsonl", emb.name());
  const auto loaded = load_knowledge_base(dir / "c.jsonl", "c", emb);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded.entries()[1].evidence == kb.entries()[1].evidence);
  for (std::size_t d = 0; d < 32; ++d)
    CHECK(loaded.entries()[0].embedding[d] ==
          static_cast<double>(static_cast<float>(kb.entries()[0].embedding[d])));

  fgtest::write_file(dir / "raw.jsonl",
                     "{\"evidence_id\": \"x\", \"text\": \"hello world\", \"url\": \"u\"}\n\n");
  const auto raw = load_knowledge_base(dir / "raw.jsonl", "r", emb);
  REQUIRE(raw.size() == 1);
  CHECK(raw.entries()[0].evidence.url() == "u");
  CHECK(raw.entries()[0].embedding == emb.embed("hello world"));

  fgtest::write_file(dir / "bad.jsonl", "{\"evidence_id\": \"x\", \"text\": \"a\"}\n{oops\n");
  try {
    load_knowledge_base(dir / "bad.jsonl", "b", emb);
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("bad.jsonl:2") != std::string::npos);
  }
}
