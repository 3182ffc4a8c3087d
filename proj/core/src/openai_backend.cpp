#include "factgauntlet/openai_backend.hpp"

#include "factgauntlet/error.hpp"

namespace factgauntlet {

OpenAiChatBackend::OpenAiChatBackend(HttpEndpointConfig endpoint, std::string model)
    : client_(std::make_unique<JsonHttpClient>(std::move(endpoint))), model_(std::move(model)) {
  if (model_.empty()) throw ValidationError("chat backend needs a model name");
}

nlohmann::json OpenAiChatBackend::request_body(const CompletionRequest& request) const {
  nlohmann::json body{
      {"model", model_},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
  };
  if (request.seed) body["seed"] = *request.seed;
  return body;
}

std::string OpenAiChatBackend::extract_content(const nlohmann::json& reply) {
  if (!reply.is_object() || !reply.contains("choices") || !reply["choices"].is_array() ||
      reply["choices"].empty())
    throw MalformedReplyError("chat reply has no choices");
  const auto& choice = reply["choices"][0];
  if (!choice.contains("message") || !choice["message"].is_object())
    throw MalformedReplyError("chat reply choice has no message");
  const auto& content = choice["message"].value("content", nlohmann::json());
  if (content.is_null()) return {};
  if (!content.is_string()) throw MalformedReplyError("chat reply content is not a string");
  return content.get<std::string>();
}

std::string OpenAiChatBackend::generate(const CompletionRequest& request) const {
  return extract_content(client_->post("/v1/chat/completions", request_body(request)));
}

}  // namespace factgauntlet
