#include "factgauntlet/llm.hpp"

#include <fstream>

#include "factgauntlet/error.hpp"
#include "factgauntlet/text.hpp"

namespace factgauntlet {

std::string complete(const LlmBackend& backend, const CompletionRequest& request) {
  if (text::trim(request.prompt).empty()) throw ValidationError("completion prompt is empty");
  if (request.temperature < 0.0) throw ValidationError("temperature must be non-negative");
  if (request.max_tokens <= 0) throw ValidationError("max_tokens must be positive");
  std::string out = backend.generate(request);
  if (text::trim(out).empty())
    throw EmptyResponseError("backend '" + backend.name() + "' returned an empty completion");
  return out;
}

std::string complete(const LlmBackend& backend, std::string prompt,
                     std::optional<std::int64_t> seed) {
  CompletionRequest request;
  request.prompt = std::move(prompt);
  request.seed = seed;
  return complete(backend, request);
}

ScriptedBackend::ScriptedBackend(std::vector<Rule> rules, std::string default_response)
    : rules_(std::move(rules)), default_response_(std::move(default_response)) {
  compiled_.reserve(rules_.size());
  for (const auto& rule : rules_) {
    if (rule.contains.empty() && !rule.pattern)
      throw ValidationError("scripted rule needs 'contains' or 'pattern'");
    if (rule.pattern) {
      try {
        compiled_.emplace_back(std::regex(*rule.pattern, std::regex::ECMAScript));
      } catch (const std::regex_error& e) {
        throw ValidationError("invalid scripted pattern '" + *rule.pattern + "': " + e.what());
      }
    } else {
      compiled_.emplace_back(std::nullopt);
    }
  }
}

ScriptedBackend ScriptedBackend::from_json(const nlohmann::json& j) {
  std::vector<Rule> rules;
  if (j.contains("rules")) {
    for (const auto& r : j.at("rules")) {
      Rule rule;
      if (r.contains("contains")) {
        if (r["contains"].is_string())
          rule.contains.push_back(r["contains"].get<std::string>());
        else
          rule.contains = r["contains"].get<std::vector<std::string>>();
      }
      if (r.contains("pattern")) rule.pattern = r["pattern"].get<std::string>();
      rule.response = r.at("response").get<std::string>();
      rules.push_back(std::move(rule));
    }
  }
  return ScriptedBackend(std::move(rules), j.value("default", std::string()));
}

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scripted rules file " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::optional<std::size_t> ScriptedBackend::match(std::string_view prompt) const {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const auto& rule = rules_[i];
    bool ok = true;
    for (const auto& needle : rule.contains) {
      if (prompt.find(needle) == std::string_view::npos) {
        ok = false;
        break;
      }
    }
    if (ok && compiled_[i]) ok = std::regex_search(prompt.begin(), prompt.end(), *compiled_[i]);
    if (ok) return i;
  }
  return std::nullopt;
}

std::string ScriptedBackend::generate(const CompletionRequest& request) const {
  if (const auto hit = match(request.prompt)) return rules_[*hit].response;
  return default_response_;
}

std::string TracingBackend::generate(const CompletionRequest& request) const {
  std::string out;
  try {
    out = inner_.generate(request);
  } catch (const std::exception& e) {
    std::lock_guard lock(mutex_);
    log_.push_back({request.prompt, std::string("<error: ") + e.what() + ">"});
    throw;
  }
  std::lock_guard lock(mutex_);
  log_.push_back({request.prompt, out});
  return out;
}

std::vector<Exchange> TracingBackend::exchanges() const {
  std::lock_guard lock(mutex_);
  return log_;
}

}  // namespace factgauntlet
