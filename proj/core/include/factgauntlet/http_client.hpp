#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace factgauntlet {

struct RetryPolicy {
  int max_retries = 3;  ///< retries after the first attempt
  std::chrono::milliseconds initial_backoff{500};
  double backoff_factor = 2.0;
  std::chrono::milliseconds max_backoff{8000};

  /// Delay before retry number `attempt` (1-based).
  std::chrono::milliseconds delay_for(int attempt) const;
};

struct HttpEndpointConfig {
  /// scheme://host[:port][/prefix]. A trailing "/v1" is tolerated.
  std::string base_url = "https://api.openai.com";
  std::string api_key;
  std::chrono::seconds timeout{120};
  RetryPolicy retry;
  std::size_t max_concurrency = 4;
  /// Token-bucket refill rate; 0 disables rate limiting.
  double requests_per_second = 0.0;
  std::size_t burst = 1;
};

/// Reads FACTGAUNTLET_API_KEY; empty when unset.
std::string api_key_from_env();

/// POSTs JSON to an OpenAI-compatible server with bounded retries.
///
/// Retriable: connection failures, timeouts, 5xx, 429. Everything else is
/// thrown immediately. Safe for concurrent use.
class JsonHttpClient {
 public:
  explicit JsonHttpClient(HttpEndpointConfig config);
  ~JsonHttpClient();
  JsonHttpClient(const JsonHttpClient&) = delete;
  JsonHttpClient& operator=(const JsonHttpClient&) = delete;

  /// `path` is relative to the API root, e.g. "/v1/chat/completions".
  nlohmann::json post(std::string_view path, const nlohmann::json& body) const;

  const HttpEndpointConfig& config() const noexcept { return config_; }
  /// Total HTTP attempts made so far, including retries.
  std::size_t attempts() const noexcept { return attempts_.load(); }

 private:
  nlohmann::json post_once(std::string_view path, const std::string& payload) const;

  HttpEndpointConfig config_;
  std::string host_;    // scheme://host:port
  std::string prefix_;  // path prefix without trailing "/v1"
  struct Limiter;
  std::unique_ptr<Limiter> limiter_;
  mutable std::atomic<std::size_t> attempts_{0};
};

}  // namespace factgauntlet
