#include "factgauntlet/live_embedder.hpp"

#include <algorithm>
#include <optional>

#include "factgauntlet/error.hpp"
#include "factgauntlet/text.hpp"

namespace factgauntlet {

OpenAiEmbedder::OpenAiEmbedder(HttpEndpointConfig endpoint, std::string model, std::size_t dim,
                               std::size_t batch_size)
    : client_(std::make_unique<JsonHttpClient>(std::move(endpoint))),
      model_(std::move(model)),
      dim_(dim),
      batch_size_(std::max<std::size_t>(batch_size, 1)) {
  if (dim_ == 0) throw ValidationError("embedding dim must be positive");
}

EmbeddingVector OpenAiEmbedder::embed(std::string_view text) const {
  const std::string one(text);
  auto out = embed_batch(std::span<const std::string>(&one, 1));
  return std::move(out.front());
}

std::vector<EmbeddingVector> OpenAiEmbedder::embed_batch(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
    const auto chunk = texts.subspan(start, std::min(batch_size_, texts.size() - start));
    nlohmann::json input = nlohmann::json::array();
    for (const auto& t : chunk) {
      if (text::trim(t).empty()) throw ValidationError("cannot embed empty text");
      input.push_back(t);
    }
    const auto reply = client_->post("/v1/embeddings", {{"model", model_}, {"input", input}});

    if (!reply.contains("data") || !reply["data"].is_array() ||
        reply["data"].size() != chunk.size())
      throw MalformedReplyError("embeddings reply has no data array of the expected size");
    std::vector<std::optional<EmbeddingVector>> slot(chunk.size());
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const auto& item = reply["data"][i];
      const std::size_t at = item.contains("index") ? item["index"].get<std::size_t>() : i;
      if (at >= chunk.size() || !item.contains("embedding"))
        throw MalformedReplyError("embeddings reply item is malformed");
      auto values = item["embedding"].get<std::vector<double>>();
      if (values.size() != dim_)
        throw MalformedReplyError("embedding has dim " + std::to_string(values.size()) +
                                  ", configured " + std::to_string(dim_));
      try {
        slot[at].emplace(std::move(values));
      } catch (const ValidationError& e) {
        throw MalformedReplyError(e.what());
      }
    }
    for (auto& s : slot) {
      if (!s) throw MalformedReplyError("embeddings reply is missing an index");
      out.push_back(std::move(*s));
    }
  }
  return out;
}

}  // namespace factgauntlet
