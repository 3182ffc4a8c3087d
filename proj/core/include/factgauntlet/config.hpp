#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "factgauntlet/defense.hpp"
#include "factgauntlet/victim.hpp"

namespace factgauntlet {

struct BackendConfig {
  std::string kind = "scripted";  ///< "scripted" or "live"
  std::filesystem::path rules_path;  ///< scripted
  std::string base_url;              ///< live
  std::string model;                 ///< live
  std::size_t max_concurrency = 4;
  double requests_per_second = 0.0;
  int max_retries = 3;
  int timeout_seconds = 120;

  friend bool operator==(const BackendConfig&, const BackendConfig&) = default;
};

struct EmbedderConfig {
  std::string kind = "hash";  ///< "hash" or "live"
  std::size_t dim = 1024;
  std::uint64_t seed = 0;
  std::string base_url;  ///< live; defaults to the backend's base_url
  std::string model;     ///< live

  friend bool operator==(const EmbedderConfig&, const EmbedderConfig&) = default;
};

/// Everything a run needs. API keys are never part of it; live endpoints read
/// FACTGAUNTLET_API_KEY from the environment.
struct ExperimentConfig {
  std::filesystem::path dataset_path;
  VictimKind victim = VictimKind::Agentic;
  /// Attack names (see make_attack), or "none" for the clean baseline.
  std::vector<std::string> attacks{"fact2fiction"};
  /// Reference attack for significance marks in reports.
  std::optional<std::string> baseline_attack;
  DefenseConfig defense;
  std::vector<double> poison_rates{0.01};
  std::size_t trials = 5;
  std::size_t k = 5;
  std::size_t max_questions = 10;
  BackendConfig backend;
  EmbedderConfig embedder;
  std::uint64_t rng_seed = 0;
  std::size_t concurrency = 1;
  std::size_t bootstrap_resamples = 10000;

  /// Throws ValidationError naming the offending key.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses a stage list such as "cluster,perplexity" or "none". Stage
/// parameters keep their defaults.
DefenseConfig defense_from_stages(std::string_view stages);

/// Paths are written as stored (absolute after load_config).
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Missing keys take their defaults; relative paths resolve against
/// `base_dir`. Throws ValidationError on unknown keys or bad values.
ExperimentConfig config_from_json(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir = {});

/// Applies one `dotted.key=value` override to a config document. The value is
/// parsed as JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Reads the file, applies overrides in order, then parses and validates.
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

/// Deterministic id derived from the evaluation-relevant config fields.
std::string compute_run_id(const ExperimentConfig& config);

/// Shortest round-trip decimal rendering, e.g. 0.01 -> "0.01".
std::string format_rate(double rate);

}  // namespace factgauntlet
