#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "factgauntlet/domain.hpp"
#include "factgauntlet/knowledge_base.hpp"

namespace factgauntlet {

/// Claims and their clean knowledge bases, in `claims.json` order.
///
/// Layout on disk:
///   claims.json        array of {claim_id, claim, label, date?, speaker?}
///   kb/<claim_id>.jsonl  one {evidence_id, text, url?} object per line
struct Dataset {
  std::vector<Claim> claims;
  std::vector<KnowledgeBase> kbs;  ///< parallel to `claims`

  std::size_t targetable_count() const noexcept;
  std::size_t evidence_count() const noexcept;
  /// Throws ValidationError for unknown ids.
  std::size_t index_of(const std::string& claim_id) const;
};

/// Throws ValidationError or ParseError naming the file (and line or array
/// index) on schema violations, duplicate claim ids, or a missing KB file.
/// Claims with a non-targetable gold label are kept; see Claim::targetable().
Dataset load_dataset(const std::filesystem::path& root, const Embedder& embedder);

/// Content hash over claims.json and every kb/*.jsonl file, as 16 hex digits.
std::string dataset_fingerprint(const std::filesystem::path& root);

}  // namespace factgauntlet
