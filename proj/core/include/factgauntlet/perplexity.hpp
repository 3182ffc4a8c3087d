#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "factgauntlet/http_client.hpp"

namespace factgauntlet {

/// Text naturalness score: finite and positive, lower means more natural.
/// Implementations are deterministic and safe for concurrent calls.
class PerplexityScorer {
 public:
  virtual ~PerplexityScorer() = default;
  virtual std::string name() const = 0;
  virtual double score(std::string_view text) const = 0;
};

/// Character bigram model with add-one smoothing over bytes plus a boundary
/// symbol. The score is exp(mean negative log-likelihood) over the text's
/// transitions, including start and end.
class CharBigramScorer final : public PerplexityScorer {
 public:
  /// Fits on the given corpus (usually a claim's clean KB). Text is lowercased.
  static CharBigramScorer fit(std::span<const std::string> corpus);

  std::string name() const override { return "char-bigram"; }
  double score(std::string_view text) const override;

 private:
  static constexpr std::size_t kSymbols = 257;  // 256 bytes + boundary
  CharBigramScorer() = default;

  std::vector<std::uint32_t> counts_ = std::vector<std::uint32_t>(kSymbols * kSymbols, 0);
  std::array<std::uint64_t, kSymbols> row_totals_{};
};

/// Perplexity from token log-probabilities returned by an OpenAI-compatible
/// `/v1/completions` endpoint with `echo` and `logprobs` enabled.
class RemoteLogprobScorer final : public PerplexityScorer {
 public:
  RemoteLogprobScorer(HttpEndpointConfig endpoint, std::string model);

  std::string name() const override { return "remote:" + model_; }
  double score(std::string_view text) const override;

  /// Pulls choices[0].logprobs.token_logprobs out of a completions reply and
  /// returns exp(-mean); null entries (the first token) are skipped. Throws
  /// MalformedReplyError when no usable log-probability is present.
  static double perplexity_from_reply(const nlohmann::json& reply);

 private:
  std::unique_ptr<JsonHttpClient> client_;
  std::string model_;
};

}  // namespace factgauntlet
