#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "factgauntlet/domain.hpp"
#include "factgauntlet/embedding.hpp"
#include "factgauntlet/llm.hpp"
#include "factgauntlet/perplexity.hpp"
#include "factgauntlet/victim.hpp"

namespace factgauntlet {

struct ClusterFilterConfig {
  std::size_t k = 2;  ///< fixed; any other value is rejected
  double density_ratio_threshold = 2.0;
  std::size_t max_iters = 100;
  std::uint64_t seed = 0;

  /// Throws ValidationError unless k == 2, threshold > 1 and max_iters >= 1.
  void validate() const;

  friend bool operator==(const ClusterFilterConfig&, const ClusterFilterConfig&) = default;
};

struct KMeansResult {
  std::vector<int> assignments;  ///< 0 or 1 per input vector
  std::vector<EmbeddingVector> centroids;
  /// Sum of squared distances to the assigned centroid after each Lloyd step.
  std::vector<double> objective_trace;
  bool converged = false;
};

/// Lloyd's algorithm with k = 2. Initialization: a seeded random point, the
/// point farthest from it (a), then the point farthest from a (b). A cluster
/// that empties takes the point farthest from its own centroid. Throws
/// ValidationError for fewer than two vectors or mismatched dimensions.
KMeansResult kmeans2(std::span<const EmbeddingVector> vectors, const ClusterFilterConfig& cfg);

/// Mean pairwise Euclidean distance among the selected members; 0 for fewer
/// than two members.
double mean_pairwise_distance(std::span<const EmbeddingVector> vectors,
                              std::span<const std::size_t> members);

/// Keep-mask for the cluster filter. Fewer than three inputs pass through.
/// Otherwise the denser cluster is dropped when the ratio of mean intra-cluster
/// distances reaches the threshold. Both clusters need at least two members for
/// a density comparison; with a singleton nothing is dropped.
std::vector<bool> cluster_keep_mask(std::span<const EmbeddingVector> vectors,
                                    const ClusterFilterConfig& cfg);

struct EmbeddedEvidence {
  Evidence evidence;
  EmbeddingVector embedding;
};

std::vector<Evidence> cluster_filter(std::span<const EmbeddedEvidence> retrieved,
                                     const ClusterFilterConfig& cfg);

/// Linear-interpolation quantile (the common "type 7" definition). Throws
/// ValidationError on empty input or q outside [0, 1].
double quantile(std::span<const double> values, double q);

/// Keep-mask: an item is dropped when its score strictly exceeds the
/// `threshold_quantile` quantile of all scores.
std::vector<bool> ppl_keep_mask(std::span<const double> scores, double threshold_quantile);

std::vector<Evidence> ppl_filter(std::span<const Evidence> evidences,
                                 const PerplexityScorer& scorer, double threshold_quantile);

/// Same id, gold label and metadata; text replaced by the trimmed paraphrase.
Claim paraphrase_claim(const Claim& claim, const LlmBackend& backend);

struct DefenseConfig {
  bool paraphrase = false;
  bool cluster = false;
  ClusterFilterConfig cluster_config;
  bool perplexity = false;
  double perplexity_quantile = 0.8;
  /// "char-bigram" (fit on the claim's clean KB) or "remote" (completions
  /// endpoint of the configured backend, using `perplexity_model`).
  std::string perplexity_scorer = "char-bigram";
  std::string perplexity_model;

  bool any() const noexcept { return paraphrase || cluster || perplexity; }
  /// "none", or the enabled stages joined by '+', e.g. "cluster+perplexity".
  std::string label() const;
  void validate() const;

  friend bool operator==(const DefenseConfig&, const DefenseConfig&) = default;
};

void to_json(nlohmann::json& j, const DefenseConfig& c);
void from_json(const nlohmann::json& j, DefenseConfig& c);

/// Per-retrieval stages in fixed order: cluster filter, then perplexity
/// filter. Dropped items carry reason "cluster" or "perplexity".
class DefensePipeline final : public RetrievalGuard {
 public:
  /// `scorer` is required when the perplexity stage is enabled.
  DefensePipeline(DefenseConfig config, std::shared_ptr<const PerplexityScorer> scorer);

  Outcome filter(const KnowledgeBase& kb, std::span<const RetrievalHit> hits) const override;

  const DefenseConfig& config() const noexcept { return config_; }

 private:
  DefenseConfig config_;
  std::shared_ptr<const PerplexityScorer> scorer_;
};

}  // namespace factgauntlet
