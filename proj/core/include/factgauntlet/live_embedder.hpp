#pragma once

#include <memory>
#include <string>

#include "factgauntlet/embedding.hpp"
#include "factgauntlet/http_client.hpp"

namespace factgauntlet {

/// Embedder backed by an OpenAI-compatible `/v1/embeddings` endpoint.
/// Vectors are used as returned (no normalization).
class OpenAiEmbedder final : public Embedder {
 public:
  OpenAiEmbedder(HttpEndpointConfig endpoint, std::string model, std::size_t dim,
                 std::size_t batch_size = 64);

  std::string name() const override { return "openai:" + model_; }
  std::size_t dim() const override { return dim_; }
  EmbeddingVector embed(std::string_view text) const override;
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

 private:
  std::unique_ptr<JsonHttpClient> client_;
  std::string model_;
  std::size_t dim_;
  std::size_t batch_size_;
};

}  // namespace factgauntlet
