#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "factgauntlet/domain.hpp"
#include "factgauntlet/embedding.hpp"

namespace factgauntlet {

struct KbEntry {
  Evidence evidence;
  EmbeddingVector embedding;
};

/// Per-claim evidence corpus. Immutable after construction; inject() builds a
/// new value.
class KnowledgeBase {
 public:
  /// Empty KB of the given embedding dimension.
  KnowledgeBase(std::string claim_id, std::size_t dim);

  /// Throws ValidationError on duplicate ids or mismatched dimensions.
  KnowledgeBase(std::string claim_id, std::size_t dim, std::vector<KbEntry> entries);

  const std::string& claim_id() const noexcept { return claim_id_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const KbEntry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  std::size_t clean_count() const noexcept { return entries_.size() - malicious_count_; }
  std::size_t malicious_count() const noexcept { return malicious_count_; }

  bool contains(const std::string& evidence_id) const;
  /// Throws ValidationError for unknown ids.
  const KbEntry& at(const std::string& evidence_id) const;

 private:
  std::string claim_id_;
  std::size_t dim_;
  std::vector<KbEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t malicious_count_ = 0;
};

struct RetrievalHit {
  std::size_t index;  ///< position in KnowledgeBase::entries()
  double distance;
};

/// Exact k-NN by Euclidean distance: the min(k, size) nearest entries,
/// ascending by distance, ties broken by lexicographic evidence id.
/// Throws ValidationError when k == 0 or the query dimension differs.
std::vector<RetrievalHit> search(const KnowledgeBase& kb, const EmbeddingVector& query,
                                 std::size_t k);

std::vector<Evidence> retrieve(const KnowledgeBase& kb, const EmbeddingVector& query,
                               std::size_t k = 5);

/// New KB = kb + poison (embedded with `embedder`). Poison ids must be new and
/// carry Malicious provenance.
KnowledgeBase inject(const KnowledgeBase& kb, std::span<const Evidence> poison,
                     const Embedder& embedder);

/// Line-delimited JSON, one Evidence per line plus a cached "embedding"
/// (base64 little-endian float32) tagged with the embedder name. Reloaded
/// embeddings are the float32-rounded values. Cached vectors are reused only
/// when the tag matches the loading embedder.
void save_knowledge_base(const KnowledgeBase& kb, const std::filesystem::path& path,
                         std::string_view embedder_name);
KnowledgeBase load_knowledge_base(const std::filesystem::path& path, std::string claim_id,
                                  const Embedder& embedder);

}  // namespace factgauntlet
