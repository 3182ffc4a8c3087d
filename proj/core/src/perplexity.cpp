#include "factgauntlet/perplexity.hpp"

#include <cmath>

#include "factgauntlet/error.hpp"

namespace factgauntlet {

namespace {

constexpr std::size_t kBoundary = 256;

std::size_t symbol(char c) {
  auto u = static_cast<unsigned char>(c);
  if (u >= 'A' && u <= 'Z') u = static_cast<unsigned char>(u - 'A' + 'a');
  return u;
}

template <typename Fn>
void for_each_transition(std::string_view text, Fn&& fn) {
  std::size_t prev = kBoundary;
  for (const char c : text) {
    const auto cur = symbol(c);
    fn(prev, cur);
    prev = cur;
  }
  fn(prev, kBoundary);
}

}  // namespace

CharBigramScorer CharBigramScorer::fit(std::span<const std::string> corpus) {
  CharBigramScorer scorer;
  for (const auto& text : corpus) {
    for_each_transition(text, [&](std::size_t prev, std::size_t cur) {
      ++scorer.counts_[prev * kSymbols + cur];
      ++scorer.row_totals_[prev];
    });
  }
  return scorer;
}

double CharBigramScorer::score(std::string_view text) const {
  double nll = 0.0;
  std::size_t n = 0;
  for_each_transition(text, [&](std::size_t prev, std::size_t cur) {
    const double p = (static_cast<double>(counts_[prev * kSymbols + cur]) + 1.0) /
                     (static_cast<double>(row_totals_[prev]) + static_cast<double>(kSymbols));
    nll -= std::log(p);
    ++n;
  });
  return std::exp(nll / static_cast<double>(n));
}

RemoteLogprobScorer::RemoteLogprobScorer(HttpEndpointConfig endpoint, std::string model)
    : client_(std::make_unique<JsonHttpClient>(std::move(endpoint))), model_(std::move(model)) {}

double RemoteLogprobScorer::perplexity_from_reply(const nlohmann::json& reply) {
  const auto fail = [&](const std::string& why) {
    throw MalformedReplyError("completions reply: " + why);
  };
  if (!reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty())
    fail("no choices");
  const auto& choice = reply["choices"][0];
  if (!choice.contains("logprobs") || !choice["logprobs"].is_object() ||
      !choice["logprobs"].contains("token_logprobs") ||
      !choice["logprobs"]["token_logprobs"].is_array())
    fail("no token_logprobs");
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& lp : choice["logprobs"]["token_logprobs"]) {
    if (!lp.is_number()) continue;
    sum += lp.get<double>();
    ++n;
  }
  if (n == 0) fail("no usable log-probabilities");
  const double ppl = std::exp(-sum / static_cast<double>(n));
  if (!std::isfinite(ppl) || ppl <= 0.0) fail("perplexity is not finite");
  return ppl;
}

double RemoteLogprobScorer::score(std::string_view text) const {
  const nlohmann::json body = {{"model", model_},   {"prompt", std::string(text)},
                               {"max_tokens", 0},   {"echo", true},
                               {"logprobs", 0},     {"temperature", 0.0}};
  return perplexity_from_reply(client_->post("/v1/completions", body));
}

}  // namespace factgauntlet
