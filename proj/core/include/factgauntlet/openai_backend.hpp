#pragma once

#include <memory>
#include <string>

#include "factgauntlet/http_client.hpp"
#include "factgauntlet/llm.hpp"

namespace factgauntlet {

/// OpenAI-compatible chat completions client. The whole prompt is sent as a
/// single user message; the reply is the first choice's message content.
class OpenAiChatBackend final : public LlmBackend {
 public:
  OpenAiChatBackend(HttpEndpointConfig endpoint, std::string model);

  std::string name() const override { return "openai:" + model_; }
  std::string generate(const CompletionRequest& request) const override;

  /// Request body for `request`; exposed for wire-format tests.
  nlohmann::json request_body(const CompletionRequest& request) const;
  /// Extracts the completion text; throws MalformedReplyError.
  static std::string extract_content(const nlohmann::json& reply);

  const JsonHttpClient& client() const noexcept { return *client_; }

 private:
  std::unique_ptr<JsonHttpClient> client_;
  std::string model_;
};

}  // namespace factgauntlet
