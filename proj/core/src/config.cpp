#include "factgauntlet/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

#include "factgauntlet/attacks.hpp"
#include "factgauntlet/error.hpp"
#include "factgauntlet/text.hpp"

namespace factgauntlet {

namespace fs = std::filesystem;

namespace {

const std::set<std::string, std::less<>> kTopLevelKeys = {
    "dataset_path", "victim",      "attacks",       "attack",     "baseline_attack",
    "defense",      "poison_rates", "poison_rate",  "trials",     "k",
    "max_questions", "backend",    "embedder",      "rng_seed",   "concurrency",
    "bootstrap_resamples"};
const std::set<std::string, std::less<>> kBackendKeys = {
    "kind",        "rules_path",          "base_url",    "model",
    "max_concurrency", "requests_per_second", "max_retries", "timeout_seconds"};
const std::set<std::string, std::less<>> kEmbedderKeys = {"kind", "dim", "seed", "base_url",
                                                           "model"};

void reject_unknown(const nlohmann::json& j, const std::set<std::string, std::less<>>& allowed,
                    std::string_view where) {
  for (const auto& [key, value] : j.items()) {
    if (text::contains_icase(key, "api_key") || text::contains_icase(key, "apikey"))
      throw ValidationError(std::string(where) + key +
                            ": API keys are read from FACTGAUNTLET_API_KEY, not from config");
    if (!allowed.contains(key))
      throw ValidationError("unknown config key '" + std::string(where) + key + "'");
  }
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return (base / p).lexically_normal();
}

template <typename T>
T get_or(const nlohmann::json& j, std::string_view key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config key '" + std::string(key) + "': " + e.what());
  }
}

BackendConfig backend_from_json(const nlohmann::json& j, const fs::path& base) {
  reject_unknown(j, kBackendKeys, "backend.");
  BackendConfig b;
  b.kind = get_or<std::string>(j, "kind", b.kind);
  b.rules_path = resolve(get_or<std::string>(j, "rules_path", ""), base);
  b.base_url = get_or<std::string>(j, "base_url", "");
  b.model = get_or<std::string>(j, "model", "");
  b.max_concurrency = get_or<std::size_t>(j, "max_concurrency", b.max_concurrency);
  b.requests_per_second = get_or<double>(j, "requests_per_second", b.requests_per_second);
  b.max_retries = get_or<int>(j, "max_retries", b.max_retries);
  b.timeout_seconds = get_or<int>(j, "timeout_seconds", b.timeout_seconds);
  return b;
}

EmbedderConfig embedder_from_json(const nlohmann::json& j) {
  reject_unknown(j, kEmbedderKeys, "embedder.");
  EmbedderConfig e;
  e.kind = get_or<std::string>(j, "kind", e.kind);
  e.dim = get_or<std::size_t>(j, "dim", e.dim);
  e.seed = get_or<std::uint64_t>(j, "seed", e.seed);
  e.base_url = get_or<std::string>(j, "base_url", "");
  e.model = get_or<std::string>(j, "model", "");
  return e;
}

}  // namespace

DefenseConfig defense_from_stages(std::string_view stages) {
  std::string list(stages);
  std::replace(list.begin(), list.end(), ',', ' ');
  std::replace(list.begin(), list.end(), '+', ' ');
  DefenseConfig d;
  for (const auto part : text::words(list)) {
    if (part == "none") continue;
    if (part == "paraphrase")
      d.paraphrase = true;
    else if (part == "cluster")
      d.cluster = true;
    else if (part == "perplexity")
      d.perplexity = true;
    else
      throw ValidationError("defense: unknown stage '" + std::string(part) + "'");
  }
  return d;
}

void ExperimentConfig::validate() const {
  if (dataset_path.empty()) throw ValidationError("dataset_path is required");
  if (attacks.empty()) throw ValidationError("attacks must list at least one attack");
  for (const auto& a : attacks)
    if (a != "none" && !is_known_attack(a))
      throw ValidationError("attacks: unknown attack '" + a + "'");
  if (std::set<std::string>(attacks.begin(), attacks.end()).size() != attacks.size())
    throw ValidationError("attacks: duplicate entries");
  if (baseline_attack &&
      std::find(attacks.begin(), attacks.end(), *baseline_attack) == attacks.end())
    throw ValidationError("baseline_attack '" + *baseline_attack + "' is not in attacks");
  defense.validate();
  if (poison_rates.empty()) throw ValidationError("poison_rates must not be empty");
  if (std::set<double>(poison_rates.begin(), poison_rates.end()).size() != poison_rates.size())
    throw ValidationError("poison_rates: duplicate entries");
  for (const double r : poison_rates)
    if (!(r > 0.0 && r <= 0.2))
      throw ValidationError("poison_rate " + format_rate(r) + " is outside (0, 0.2]");
  if (trials < 1) throw ValidationError("trials must be at least 1");
  if (k < 1) throw ValidationError("k must be at least 1");
  if (max_questions < 1 || max_questions > 10)
    throw ValidationError("max_questions must be within [1, 10]");
  if (concurrency < 1) throw ValidationError("concurrency must be at least 1");
  if (bootstrap_resamples < 1000) throw ValidationError("bootstrap_resamples must be >= 1000");

  if (backend.kind == "scripted") {
    if (backend.rules_path.empty())
      throw ValidationError("backend.rules_path is required for the scripted backend");
  } else if (backend.kind == "live") {
    if (backend.base_url.empty() || backend.model.empty())
      throw ValidationError("backend.base_url and backend.model are required for live backends");
  } else {
    throw ValidationError("backend.kind must be scripted or live");
  }
  if (backend.max_concurrency < 1) throw ValidationError("backend.max_concurrency must be >= 1");
  if (backend.max_retries < 0) throw ValidationError("backend.max_retries must be >= 0");

  if (embedder.kind == "hash") {
    if (embedder.dim < 1) throw ValidationError("embedder.dim must be at least 1");
  } else if (embedder.kind == "live") {
    if (embedder.model.empty() || embedder.dim < 1)
      throw ValidationError("embedder.model and embedder.dim are required for live embedders");
    if (embedder.base_url.empty() && backend.base_url.empty())
      throw ValidationError("embedder.base_url is required for live embedders");
  } else {
    throw ValidationError("embedder.kind must be hash or live");
  }
  if (defense.perplexity && defense.perplexity_scorer == "remote" &&
      (backend.kind != "live" || defense.perplexity_model.empty()))
    throw ValidationError("the remote perplexity scorer needs a live backend and a model");
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json defense;
  to_json(defense, c.defense);
  return nlohmann::json{
      {"dataset_path", c.dataset_path.string()},
      {"victim", std::string(to_string(c.victim))},
      {"attacks", c.attacks},
      {"baseline_attack", c.baseline_attack ? nlohmann::json(*c.baseline_attack) : nlohmann::json()},
      {"defense", defense},
      {"poison_rates", c.poison_rates},
      {"trials", c.trials},
      {"k", c.k},
      {"max_questions", c.max_questions},
      {"backend",
       {{"kind", c.backend.kind},
        {"rules_path", c.backend.rules_path.string()},
        {"base_url", c.backend.base_url},
        {"model", c.backend.model},
        {"max_concurrency", c.backend.max_concurrency},
        {"requests_per_second", c.backend.requests_per_second},
        {"max_retries", c.backend.max_retries},
        {"timeout_seconds", c.backend.timeout_seconds}}},
      {"embedder",
       {{"kind", c.embedder.kind},
        {"dim", c.embedder.dim},
        {"seed", c.embedder.seed},
        {"base_url", c.embedder.base_url},
        {"model", c.embedder.model}}},
      {"rng_seed", c.rng_seed},
      {"concurrency", c.concurrency},
      {"bootstrap_resamples", c.bootstrap_resamples}};
}

ExperimentConfig config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  reject_unknown(j, kTopLevelKeys, "");

  ExperimentConfig c;
  c.dataset_path = resolve(get_or<std::string>(j, "dataset_path", ""), base_dir);
  if (j.contains("victim")) c.victim = victim_from_string(get_or<std::string>(j, "victim", ""));

  if (j.contains("attacks")) {
    const auto& a = j["attacks"];
    c.attacks = a.is_string() ? std::vector<std::string>{a.get<std::string>()}
                              : get_or<std::vector<std::string>>(j, "attacks", {});
  } else if (j.contains("attack")) {
    c.attacks = {get_or<std::string>(j, "attack", "")};
  }
  if (j.contains("baseline_attack") && !j["baseline_attack"].is_null())
    c.baseline_attack = get_or<std::string>(j, "baseline_attack", "");

  if (j.contains("defense")) {
    const auto& d = j["defense"];
    if (d.is_string()) {
      c.defense = defense_from_stages(d.get<std::string>());
    } else if (!d.is_null()) {
      try {
        c.defense = d.get<DefenseConfig>();
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("defense: ") + e.what());
      }
    }
  }

  if (j.contains("poison_rates")) {
    const auto& r = j["poison_rates"];
    c.poison_rates = r.is_number() ? std::vector<double>{r.get<double>()}
                                   : get_or<std::vector<double>>(j, "poison_rates", {});
  } else if (j.contains("poison_rate")) {
    c.poison_rates = {get_or<double>(j, "poison_rate", 0.0)};
  }
  c.trials = get_or<std::size_t>(j, "trials", c.trials);
  c.k = get_or<std::size_t>(j, "k", c.k);
  c.max_questions = get_or<std::size_t>(j, "max_questions", c.max_questions);
  if (j.contains("backend")) c.backend = backend_from_json(j["backend"], base_dir);
  if (j.contains("embedder")) c.embedder = embedder_from_json(j["embedder"]);
  c.rng_seed = get_or<std::uint64_t>(j, "rng_seed", c.rng_seed);
  c.concurrency = get_or<std::size_t>(j, "concurrency", c.concurrency);
  c.bootstrap_resamples = get_or<std::size_t>(j, "bootstrap_resamples", c.bootstrap_resamples);
  c.validate();
  return c;
}

void apply_override(nlohmann::json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ValidationError("override '" + std::string(assignment) + "' is not key=value");
  const auto key = text::trim(assignment.substr(0, eq));
  const auto raw = std::string(assignment.substr(eq + 1));

  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }

  nlohmann::json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const auto part = std::string(key.substr(start, dot - start));
    if (part.empty()) throw ValidationError("override key '" + std::string(key) + "' is malformed");
    if (dot == std::string_view::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    auto& child = (*node)[part];
    if (!child.is_object()) child = nlohmann::json::object();
    node = &child;
    start = dot + 1;
  }
}

ExperimentConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return config_from_json(doc, fs::absolute(path).parent_path());
}

std::string compute_run_id(const ExperimentConfig& config) {
  auto j = config_to_json(config);
  // Worker counts do not change results.
  j.erase("concurrency");
  j["backend"].erase("max_concurrency");
  j["backend"].erase("requests_per_second");
  return text::hex64(text::fnv1a64(j.dump())).substr(0, 12);
}

std::string format_rate(double rate) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, rate);
  if (ec != std::errc{}) return std::to_string(rate);
  return std::string(buf, end);
}

}  // namespace factgauntlet
