#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "factgauntlet/attacks.hpp"
#include "factgauntlet/config.hpp"
#include "factgauntlet/dataset.hpp"
#include "factgauntlet/metrics.hpp"
#include "factgauntlet/report.hpp"
#include "factgauntlet/victim.hpp"

namespace factgauntlet {

/// Backend and embedder built from a config. With tracing on, every
/// completion is recorded and can be dumped with exchanges().
class Runtime {
 public:
  explicit Runtime(const ExperimentConfig& config, bool trace = false);
  /// Uses caller-owned components; nothing is traced.
  Runtime(const LlmBackend& backend, const Embedder& embedder, std::string backend_identity);

  const LlmBackend& backend() const noexcept { return *active_; }
  const Embedder& embedder() const noexcept { return *embedder_ref_; }
  /// Stable id of the backend behaviour (rules file hash or url + model).
  const std::string& backend_identity() const noexcept { return identity_; }
  std::vector<Exchange> exchanges() const;

 private:
  std::unique_ptr<LlmBackend> owned_backend_;
  std::unique_ptr<Embedder> owned_embedder_;
  std::unique_ptr<TracingBackend> tracer_;
  const LlmBackend* active_ = nullptr;
  const Embedder* embedder_ref_ = nullptr;
  std::string identity_;
};

std::unique_ptr<LlmBackend> make_backend(const BackendConfig& config);
std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config,
                                        const BackendConfig& backend);
std::string backend_identity(const BackendConfig& config);

/// On-disk probe reports, one JSON file per claim, under a directory keyed by
/// victim and backend identity.
class ProbeCache {
 public:
  ProbeCache(std::filesystem::path root, VictimKind victim, const std::string& backend_identity);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::optional<FactCheckReport> load(const std::string& claim_id) const;
  void store(const FactCheckReport& report) const;

 private:
  std::filesystem::path dir_;
};

struct ExcludedClaim {
  std::string claim_id;
  std::string reason;

  friend bool operator==(const ExcludedClaim&, const ExcludedClaim&) = default;
};

/// Claims the clean victim already gets right, with their probe reports.
struct EvalSet {
  std::vector<std::string> claim_ids;
  /// Parallel to claim_ids; empty when attacks run without probing.
  std::vector<FactCheckReport> probes;
  std::vector<ExcludedClaim> excluded;
  std::vector<std::string> warnings;

  /// Null when the claim has no probe report.
  const FactCheckReport* probe_for(const std::string& claim_id) const;
};

/// eval_set.json content: ids, exclusions and warnings (probes live in the
/// probe cache).
nlohmann::json eval_set_to_json(const EvalSet& eval_set);

/// Runs the victim on every targetable clean KB (reusing cached probes) and
/// keeps claims whose verdict equals the gold label. Victim errors exclude the
/// claim with the error as reason.
EvalSet build_eval_set(const Dataset& dataset, VictimKind victim, const VictimOptions& options,
                       const Embedder& embedder, const LlmBackend& backend,
                       std::size_t concurrency = 1, const ProbeCache* cache = nullptr);

/// Rebuilds an EvalSet from eval_set.json plus cached probes. Throws
/// ValidationError when a listed probe is missing.
EvalSet load_eval_set(const std::filesystem::path& eval_set_path, const ProbeCache& cache);

/// One attack execution: an attack on a claim at a rate in a trial.
struct AttackJob {
  std::string attack;
  double rate = 0.0;
  std::size_t trial = 0;
  std::string claim_id;

  friend bool operator==(const AttackJob&, const AttackJob&) = default;
};

/// Jobs in (attack, rate, trial, claim) order, claims in eval-set order.
std::vector<AttackJob> plan_jobs(const ExperimentConfig& config, const EvalSet& eval_set);

/// Per-job seed derived from the run seed and the job coordinates.
std::uint64_t job_seed(std::uint64_t rng_seed, const AttackJob& job);

struct AttackOutcome {
  AttackJob job;
  std::optional<PoisonSet> poison;  ///< empty on failure or for attack "none"
  std::string error;

  bool failed() const noexcept { return !error.empty(); }
};

/// `out/poison/<attack>/rate-<r>/trial-<t>/<claim>.json` (or `.error.json`).
class PoisonStore {
 public:
  explicit PoisonStore(std::filesystem::path root) : root_(std::move(root)) {}

  void store(const AttackOutcome& outcome) const;
  /// Throws ValidationError when neither a poison set nor an error record
  /// exists for the job.
  AttackOutcome load(const AttackJob& job) const;
  std::filesystem::path path_for(const AttackJob& job, bool error) const;

 private:
  std::filesystem::path root_;
};

/// Crafts poison sets for every job. Fact2Fiction jobs need the eval set's
/// probe reports. Failures are recorded, not thrown.
std::vector<AttackOutcome> run_attacks(const ExperimentConfig& config, const Dataset& dataset,
                                       const EvalSet& eval_set, const LlmBackend& backend);

struct ClaimFailure {
  AttackJob job;
  std::string stage;  ///< "attack" or "evaluate"
  std::string message;

  friend bool operator==(const ClaimFailure&, const ClaimFailure&) = default;
};

struct ExperimentResult {
  std::string run_id;
  std::vector<ClaimResult> results;
  std::vector<FactCheckReport> reports;  ///< post-attack victim reports, parallel to results
  std::vector<ClaimFailure> failures;
  std::vector<SummaryRow> summary;
  std::vector<PValueEntry> pvalues;
  std::size_t job_count = 0;

  double error_fraction() const noexcept;
  /// More than 10% of the attacked claims errored.
  bool failed() const noexcept;
};

inline constexpr double kMaxErrorFraction = 0.10;

/// Injects each poison set, runs the (defended) victim and scores the
/// outcome. Per-claim errors are recorded as failures.
ExperimentResult evaluate(const ExperimentConfig& config, const Dataset& dataset,
                          const EvalSet& eval_set, const std::vector<AttackOutcome>& attacks,
                          const Runtime& runtime);

/// Paired bootstrap over (claim, trial) for every ordered attack pair at
/// every rate, for ASR and SFR.
std::vector<PValueEntry> compute_pvalues(const ExperimentConfig& config,
                                         const std::vector<ClaimResult>& results);

/// probe -> attack -> evaluate in memory.
ExperimentResult run_experiment(const ExperimentConfig& config, const Runtime& runtime);
ExperimentResult run_experiment(const ExperimentConfig& config);

struct RunManifest {
  std::string run_id;
  std::string stage;
  nlohmann::json config;
  std::string dataset_fingerprint;
  std::uint64_t rng_seed = 0;
  std::string started_at;
  std::string finished_at;
  nlohmann::json versions;
  /// Protocol choices the results depend on but the config does not spell
  /// out (message layout, embedding handling, aggregation, trial pooling).
  nlohmann::json protocol;
};

void to_json(nlohmann::json& j, const RunManifest& m);
RunManifest make_manifest(const ExperimentConfig& config, std::string stage);
/// UTC, e.g. "2026-10-17T09:30:00Z".
std::string utc_timestamp();

/// Writes claims.jsonl, reports.jsonl, summary.json, summary.csv,
/// pvalues.json and manifest.json into `dir`.
void write_results(const std::filesystem::path& dir, const ExperimentResult& result,
                   const ExperimentConfig& config, const RunManifest& manifest);

/// Writes `text` to `path` atomically enough for our purposes (temp + rename),
/// creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace factgauntlet
