#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace factgauntlet {

struct CompletionRequest {
  std::string prompt;
  double temperature = 1.0;
  int max_tokens = 1024;
  std::optional<std::int64_t> seed;
};

/// A text-completion backend. Implementations must tolerate concurrent calls.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string name() const = 0;
  /// Raw backend call; prefer the free function complete().
  virtual std::string generate(const CompletionRequest& request) const = 0;
};

/// Validates the request, calls the backend, and rejects empty completions
/// with EmptyResponseError.
std::string complete(const LlmBackend& backend, const CompletionRequest& request);

/// Shorthand for a default-temperature request.
std::string complete(const LlmBackend& backend, std::string prompt,
                     std::optional<std::int64_t> seed = std::nullopt);

/// Deterministic rule-based stand-in for an LLM.
///
/// Rules are tried in order; the first whose matchers all hold wins. A rule
/// can require a list of substrings (`contains`) and/or a regular expression
/// (`pattern`, ECMAScript, searched anywhere in the prompt).
class ScriptedBackend final : public LlmBackend {
 public:
  struct Rule {
    std::vector<std::string> contains;
    std::optional<std::string> pattern;
    std::string response;
  };

  ScriptedBackend(std::vector<Rule> rules, std::string default_response);

  /// `{"rules": [{"contains": str | [str], "pattern": str, "response": str}],
  ///   "default": str}`
  static ScriptedBackend from_json(const nlohmann::json& j);
  static ScriptedBackend from_file(const std::filesystem::path& path);

  std::string name() const override { return "scripted"; }
  std::string generate(const CompletionRequest& request) const override;

  /// Index of the matching rule, or nullopt when the default applies.
  std::optional<std::size_t> match(std::string_view prompt) const;
  std::size_t rule_count() const noexcept { return rules_.size(); }

 private:
  std::vector<Rule> rules_;
  std::vector<std::optional<std::regex>> compiled_;
  std::string default_response_;
};

struct Exchange {
  std::string prompt;
  std::string completion;
};

/// Records every prompt/completion pair passing through it.
class TracingBackend final : public LlmBackend {
 public:
  explicit TracingBackend(const LlmBackend& inner) : inner_(inner) {}

  std::string name() const override { return inner_.name(); }
  std::string generate(const CompletionRequest& request) const override;

  std::vector<Exchange> exchanges() const;

 private:
  const LlmBackend& inner_;
  mutable std::mutex mutex_;
  mutable std::vector<Exchange> log_;
};

}  // namespace factgauntlet
