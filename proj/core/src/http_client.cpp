#include "factgauntlet/http_client.hpp"

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <semaphore>
#include <thread>

#include <httplib.h>

#include "factgauntlet/error.hpp"

namespace factgauntlet {

std::chrono::milliseconds RetryPolicy::delay_for(int attempt) const {
  double ms = static_cast<double>(initial_backoff.count());
  for (int i = 1; i < attempt; ++i) ms *= backoff_factor;
  ms = std::min(ms, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<long long>(ms));
}

std::string api_key_from_env() {
  const char* key = std::getenv("FACTGAUNTLET_API_KEY");
  return key ? std::string(key) : std::string();
}

struct JsonHttpClient::Limiter {
  explicit Limiter(std::size_t max_concurrency, double rate, std::size_t burst)
      : slots(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(max_concurrency, 1, 1024))),
        rate(rate),
        capacity(static_cast<double>(std::max<std::size_t>(burst, 1))),
        tokens(capacity),
        last(std::chrono::steady_clock::now()) {}

  // Blocks until one token is available.
  void acquire_token() {
    if (rate <= 0.0) return;
    for (;;) {
      std::chrono::duration<double> wait{};
      {
        std::lock_guard lock(mutex);
        const auto now = std::chrono::steady_clock::now();
        tokens = std::min(capacity,
                          tokens + std::chrono::duration<double>(now - last).count() * rate);
        last = now;
        if (tokens >= 1.0) {
          tokens -= 1.0;
          return;
        }
        wait = std::chrono::duration<double>((1.0 - tokens) / rate);
      }
      std::this_thread::sleep_for(wait);
    }
  }

  std::counting_semaphore<1024> slots;
  double rate;
  double capacity;
  double tokens;
  std::chrono::steady_clock::time_point last;
  std::mutex mutex;
};

JsonHttpClient::JsonHttpClient(HttpEndpointConfig config) : config_(std::move(config)) {
  std::string url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ValidationError("base_url must include a scheme: '" + config_.base_url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  host_ = url.substr(0, path_start);
  prefix_ = path_start == std::string::npos ? std::string() : url.substr(path_start);
  if (prefix_.ends_with("/v1")) prefix_.resize(prefix_.size() - 3);
  limiter_ = std::make_unique<Limiter>(config_.max_concurrency, config_.requests_per_second,
                                       config_.burst);
}

JsonHttpClient::~JsonHttpClient() = default;

nlohmann::json JsonHttpClient::post(std::string_view path, const nlohmann::json& body) const {
  const std::string payload = body.dump();
  for (int attempt = 0;; ++attempt) {
    try {
      limiter_->acquire_token();
      limiter_->slots.acquire();
      struct Release {
        Limiter& l;
        ~Release() { l.slots.release(); }
      } release{*limiter_};
      return post_once(path, payload);
    } catch (const BackendError& e) {
      if (!e.retriable() || attempt >= config_.retry.max_retries) throw;
      std::this_thread::sleep_for(config_.retry.delay_for(attempt + 1));
    }
  }
}

nlohmann::json JsonHttpClient::post_once(std::string_view path, const std::string& payload) const {
  ++attempts_;
  httplib::Client client(host_);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(config_.timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(config_.timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(config_.timeout));

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const std::string full_path = prefix_ + std::string(path);
  auto res = client.Post(full_path, headers, payload, "application/json");
  if (!res) {
    throw TransportError("request to " + host_ + full_path +
                         " failed: " + httplib::to_string(res.error()));
  }
  const int status = res->status;
  if (status == 429) throw RateLimitError("rate limited by " + host_);
  if (status >= 500) throw TransportError("server error " + std::to_string(status), status);
  if (status < 200 || status >= 300) {
    throw BackendError("HTTP " + std::to_string(status) + " from " + host_ + full_path + ": " +
                           res->body.substr(0, 512),
                       false, status);
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception&) {
    throw MalformedReplyError("response body is not JSON: " + res->body.substr(0, 256), status);
  }
}

}  // namespace factgauntlet
