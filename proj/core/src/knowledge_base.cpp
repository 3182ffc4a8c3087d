#include "factgauntlet/knowledge_base.hpp"

#include <algorithm>
#include <fstream>

#include "factgauntlet/error.hpp"
#include "factgauntlet/text.hpp"

namespace factgauntlet {

KnowledgeBase::KnowledgeBase(std::string claim_id, std::size_t dim)
    : claim_id_(std::move(claim_id)), dim_(dim) {
  if (dim_ == 0) throw ValidationError("knowledge base dim must be positive");
}

KnowledgeBase::KnowledgeBase(std::string claim_id, std::size_t dim, std::vector<KbEntry> entries)
    : KnowledgeBase(std::move(claim_id), dim) {
  entries_ = std::move(entries);
  index_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.embedding.dim() != dim_)
      throw ValidationError("evidence '" + e.evidence.id() + "' has embedding dim " +
                            std::to_string(e.embedding.dim()) + ", expected " +
                            std::to_string(dim_));
    if (!index_.emplace(e.evidence.id(), i).second)
      throw ValidationError("duplicate evidence id '" + e.evidence.id() + "' in KB of claim '" +
                            claim_id_ + "'");
    if (e.evidence.is_malicious()) ++malicious_count_;
  }
}

bool KnowledgeBase::contains(const std::string& evidence_id) const {
  return index_.contains(evidence_id);
}

const KbEntry& KnowledgeBase::at(const std::string& evidence_id) const {
  const auto it = index_.find(evidence_id);
  if (it == index_.end()) throw ValidationError("unknown evidence id '" + evidence_id + "'");
  return entries_[it->second];
}

std::vector<RetrievalHit> search(const KnowledgeBase& kb, const EmbeddingVector& query,
                                 std::size_t k) {
  if (k == 0) throw ValidationError("retrieve: k must be at least 1");
  if (kb.empty()) return {};
  if (query.dim() != kb.dim())
    throw ValidationError("retrieve: query dim " + std::to_string(query.dim()) +
                          " does not match KB dim " + std::to_string(kb.dim()));

  const auto entries = kb.entries();
  std::vector<RetrievalHit> hits;
  hits.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i)
    hits.push_back({i, euclidean_distance(query.values(), entries[i].embedding.values())});

  const auto closer = [&](const RetrievalHit& a, const RetrievalHit& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return entries[a.index].evidence.id() < entries[b.index].evidence.id();
  };
  const std::size_t take = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(take), hits.end(),
                    closer);
  hits.resize(take);
  return hits;
}

std::vector<Evidence> retrieve(const KnowledgeBase& kb, const EmbeddingVector& query,
                               std::size_t k) {
  std::vector<Evidence> out;
  for (const auto& hit : search(kb, query, k)) out.push_back(kb.entries()[hit.index].evidence);
  return out;
}

KnowledgeBase inject(const KnowledgeBase& kb, std::span<const Evidence> poison,
                     const Embedder& embedder) {
  if (!poison.empty() && embedder.dim() != kb.dim())
    throw ValidationError("inject: embedder dim does not match KB dim");

  std::vector<std::string> texts;
  texts.reserve(poison.size());
  for (const auto& e : poison) {
    if (!e.is_malicious())
      throw ValidationError("inject: evidence '" + e.id() + "' is not marked malicious");
    if (kb.contains(e.id()))
      throw ValidationError("inject: evidence id '" + e.id() + "' already in KB");
    texts.push_back(e.text());
  }
  auto embeddings = embedder.embed_batch(texts);
  if (embeddings.size() != poison.size())
    throw BackendError("inject: embedder returned wrong number of vectors", false);

  std::vector<KbEntry> entries(kb.entries().begin(), kb.entries().end());
  entries.reserve(entries.size() + poison.size());
  for (std::size_t i = 0; i < poison.size(); ++i)
    entries.push_back({poison[i], std::move(embeddings[i])});
  // Constructor re-checks id uniqueness within the poison set itself.
  return KnowledgeBase(kb.claim_id(), kb.dim(), std::move(entries));
}

void save_knowledge_base(const KnowledgeBase& kb, const std::filesystem::path& path,
                         std::string_view embedder_name) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write knowledge base file " + path.string());
  for (const auto& entry : kb.entries()) {
    nlohmann::json line = entry.evidence;
    line["embedding"] = encode_embedding(entry.embedding);
    line["embedder"] = embedder_name;
    out << line.dump() << '\n';
  }
}

KnowledgeBase load_knowledge_base(const std::filesystem::path& path, std::string claim_id,
                                  const Embedder& embedder) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open knowledge base file " + path.string());

  std::vector<Evidence> evidences;
  std::vector<std::optional<EmbeddingVector>> cached;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      // Dataset files use evidence_id; persisted KBs use id.
      nlohmann::json normalized = j;
      if (!normalized.contains("id") && normalized.contains("evidence_id"))
        normalized["id"] = normalized["evidence_id"];
      evidences.push_back(evidence_from_json(normalized));
      const bool same_embedder =
          j.contains("embedder") && j["embedder"] == nlohmann::json(embedder.name());
      if (same_embedder && j.contains("embedding") && j["embedding"].is_string())
        cached.emplace_back(decode_embedding(j["embedding"].get<std::string>()));
      else
        cached.emplace_back(std::nullopt);
    } catch (const Error& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }

  std::vector<std::string> missing_texts;
  std::vector<std::size_t> missing_at;
  for (std::size_t i = 0; i < evidences.size(); ++i) {
    if (!cached[i] || cached[i]->dim() != embedder.dim()) {
      missing_texts.push_back(evidences[i].text());
      missing_at.push_back(i);
    }
  }
  if (!missing_texts.empty()) {
    auto fresh = embedder.embed_batch(missing_texts);
    for (std::size_t j = 0; j < missing_at.size(); ++j)
      cached[missing_at[j]] = std::move(fresh[j]);
  }

  std::vector<KbEntry> entries;
  entries.reserve(evidences.size());
  for (std::size_t i = 0; i < evidences.size(); ++i)
    entries.push_back({std::move(evidences[i]), std::move(*cached[i])});
  try {
    return KnowledgeBase(std::move(claim_id), embedder.dim(), std::move(entries));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace factgauntlet
