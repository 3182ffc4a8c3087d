// factgauntlet: probe, attack, evaluate and report over one config file.
//
// Exit codes: 0 ok, 1 run failure, 2 usage or configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "factgauntlet/config.hpp"
#include "factgauntlet/dataset.hpp"
#include "factgauntlet/error.hpp"
#include "factgauntlet/experiment.hpp"
#include "factgauntlet/report.hpp"

namespace fs = std::filesystem;
namespace fg = factgauntlet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitUsage = 2;

/// Precondition failures the operator can fix (missing files, wrong order of
/// subcommands). Reported with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool trace = false;
  std::vector<std::string> overrides;
  std::string defense;
};

void log(const std::string& message) { fmt::print(stderr, "factgauntlet: {}\n", message); }

fg::ExperimentConfig load_config(const GlobalOptions& opts) {
  if (opts.config_path.empty()) throw UsageError("--config is required for this subcommand");
  auto overrides = opts.overrides;
  if (!opts.defense.empty()) {
    const auto stages = fg::defense_from_stages(opts.defense);
    overrides.push_back(fmt::format("defense.paraphrase={}", stages.paraphrase));
    overrides.push_back(fmt::format("defense.cluster.enabled={}", stages.cluster));
    overrides.push_back(fmt::format("defense.perplexity.enabled={}", stages.perplexity));
  }
  if (opts.seed) overrides.push_back(fmt::format("rng_seed={}", *opts.seed));
  return fg::load_config(opts.config_path, overrides);
}

fg::Dataset load_dataset(const fg::ExperimentConfig& config, const fg::Runtime& runtime) {
  if (!fs::exists(config.dataset_path / "claims.json"))
    throw UsageError("dataset not found: " + (config.dataset_path / "claims.json").string());
  return fg::load_dataset(config.dataset_path, runtime.embedder());
}

// One manifest per output directory; each stage adds its own entry.
void update_out_manifest(const fs::path& out, const fg::RunManifest& manifest) {
  const auto path = out / "manifest.json";
  nlohmann::json doc = nlohmann::json::object();
  if (fs::exists(path)) {
    std::ifstream in(path);
    doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) doc = nlohmann::json::object();
  }
  auto entry = nlohmann::json(manifest);
  entry["finished_at"] = fg::utc_timestamp();
  doc["stages"][manifest.stage] = entry;
  fg::write_text_file(path, doc.dump(2) + "\n");
}

void write_trace(const fs::path& out, const std::string& stage, const fg::Runtime& runtime,
                 bool enabled) {
  if (!enabled) return;
  std::string lines;
  for (const auto& ex : runtime.exchanges())
    lines += nlohmann::json{{"prompt", ex.prompt}, {"completion", ex.completion}}.dump() + "\n";
  const auto path = out / "trace" / (stage + ".jsonl");
  fg::write_text_file(path, lines);
  log(fmt::format("trace: {} exchanges written to {}", runtime.exchanges().size(),
                  path.string()));
}

fg::ProbeCache probe_cache(const GlobalOptions& opts, const fg::ExperimentConfig& config,
                           const fg::Runtime& runtime) {
  return fg::ProbeCache(fs::path(opts.out_dir) / "probes", config.victim,
                        runtime.backend_identity());
}

fg::EvalSet require_eval_set(const GlobalOptions& opts, const fg::ExperimentConfig& config,
                             const fg::Runtime& runtime) {
  const auto path = fs::path(opts.out_dir) / "eval_set.json";
  if (!fs::exists(path))
    throw UsageError("no eval set at " + path.string() + "; run `factgauntlet probe` first");
  try {
    return fg::load_eval_set(path, probe_cache(opts, config, runtime));
  } catch (const fg::ValidationError& e) {
    throw UsageError(e.what());
  }
}

int cmd_probe(const GlobalOptions& opts) {
  const auto config = load_config(opts);
  auto manifest = fg::make_manifest(config, "probe");
  const fg::Runtime runtime(config, opts.trace);
  const auto dataset = load_dataset(config, runtime);
  const auto cache = probe_cache(opts, config, runtime);

  const auto eval_set = fg::build_eval_set(
      dataset, config.victim, fg::VictimOptions{config.k, config.max_questions},
      runtime.embedder(), runtime.backend(), config.concurrency, &cache);

  auto doc = fg::eval_set_to_json(eval_set);
  doc["victim"] = std::string(fg::to_string(config.victim));
  doc["probe_dir"] = fs::relative(cache.dir(), opts.out_dir).generic_string();
  fg::write_text_file(fs::path(opts.out_dir) / "eval_set.json", doc.dump(2) + "\n");
  update_out_manifest(opts.out_dir, manifest);
  write_trace(opts.out_dir, "probe", runtime, opts.trace);

  log(fmt::format("{} claims loaded ({} targetable, {} evidences); eval set: {} claims",
                  dataset.claims.size(), dataset.targetable_count(), dataset.evidence_count(),
                  eval_set.claim_ids.size()));
  for (const auto& e : eval_set.excluded) log(fmt::format("excluded {}: {}", e.claim_id, e.reason));
  for (const auto& w : eval_set.warnings) log("warning: " + w);
  return kExitOk;
}

int cmd_attack(const GlobalOptions& opts) {
  const auto config = load_config(opts);
  auto manifest = fg::make_manifest(config, "attack");
  const fg::Runtime runtime(config, opts.trace);
  const auto dataset = load_dataset(config, runtime);

  bool needs_probe = false;
  for (const auto& name : config.attacks)
    if (name != "none" && fg::make_attack(name, &runtime.backend())->needs_probe())
      needs_probe = true;

  fg::EvalSet eval_set;
  if (fs::exists(fs::path(opts.out_dir) / "eval_set.json")) {
    eval_set = require_eval_set(opts, config, runtime);
  } else if (needs_probe) {
    throw UsageError("fact2fiction needs probe reports; run `factgauntlet probe` with the same "
                     "config and --out first");
  } else {
    for (const auto& claim : dataset.claims)
      if (claim.targetable()) eval_set.claim_ids.push_back(claim.id);
    log("no eval set found; attacking every targetable claim");
  }

  const auto outcomes = fg::run_attacks(config, dataset, eval_set, runtime.backend());
  const fg::PoisonStore store(fs::path(opts.out_dir) / "poison");
  std::size_t failures = 0, evidences = 0;
  for (const auto& o : outcomes) {
    store.store(o);
    if (o.failed()) {
      ++failures;
      log(fmt::format("attack {} on {} (rate {}, trial {}) failed: {}", o.job.attack,
                      o.job.claim_id, fg::format_rate(o.job.rate), o.job.trial, o.error));
    } else if (o.poison) {
      evidences += o.poison->evidences.size();
    }
  }
  update_out_manifest(opts.out_dir, manifest);
  write_trace(opts.out_dir, "attack", runtime, opts.trace);

  log(fmt::format("{} attack jobs, {} malicious evidences, {} failures", outcomes.size(),
                  evidences, failures));
  const bool failed = !outcomes.empty() && static_cast<double>(failures) /
                                                   static_cast<double>(outcomes.size()) >
                                               fg::kMaxErrorFraction;
  return failed ? kExitRunFailure : kExitOk;
}

int cmd_evaluate(const GlobalOptions& opts) {
  const auto config = load_config(opts);
  auto manifest = fg::make_manifest(config, "evaluate");
  const fg::Runtime runtime(config, opts.trace);
  const auto dataset = load_dataset(config, runtime);
  const auto eval_set = require_eval_set(opts, config, runtime);

  const fg::PoisonStore store(fs::path(opts.out_dir) / "poison");
  std::vector<fg::AttackOutcome> outcomes;
  try {
    for (const auto& job : fg::plan_jobs(config, eval_set)) outcomes.push_back(store.load(job));
  } catch (const fg::ValidationError& e) {
    throw UsageError(e.what());
  }

  const auto result = fg::evaluate(config, dataset, eval_set, outcomes, runtime);
  const auto dir = fs::path(opts.out_dir) / "results" / result.run_id;
  fg::write_results(dir, result, config, manifest);
  write_trace(opts.out_dir, "evaluate", runtime, opts.trace);

  std::vector<fg::LoadedRun> runs{{result.run_id, result.summary, result.pvalues}};
  std::cout << fg::render_report_text(fg::build_report(runs, config.baseline_attack));
  log(fmt::format("run {}: {} results, {} failures; written to {}", result.run_id,
                  result.results.size(), result.failures.size(), dir.string()));
  for (const auto& f : result.failures)
    log(fmt::format("{} failure for {} ({}, rate {}, trial {}): {}", f.stage, f.job.claim_id,
                    f.job.attack, fg::format_rate(f.job.rate), f.job.trial, f.message));
  if (result.failed()) {
    log(fmt::format("run failed: {:.1f}% of claims errored (limit {:.0f}%)",
                    100.0 * result.error_fraction(), 100.0 * fg::kMaxErrorFraction));
    return kExitRunFailure;
  }
  return kExitOk;
}

int cmd_report(const GlobalOptions& opts, std::vector<std::string> run_ids,
               std::optional<std::string> baseline) {
  std::optional<fg::ExperimentConfig> config;
  if (!opts.config_path.empty()) config = load_config(opts);
  if (run_ids.empty()) {
    if (!config) throw UsageError("report needs run ids or --config");
    run_ids.push_back(fg::compute_run_id(*config));
  }
  if (!baseline && config) baseline = config->baseline_attack;

  std::vector<fg::LoadedRun> runs;
  try {
    for (const auto& id : run_ids)
      runs.push_back(fg::load_run(fs::path(opts.out_dir) / "results", id));
  } catch (const fg::ValidationError& e) {
    throw UsageError(e.what());
  }
  const auto table = fg::build_report(runs, baseline);
  std::cout << fg::render_report_text(table);
  const auto csv_path = fs::path(opts.out_dir) / "report.csv";
  fg::write_text_file(csv_path, fg::render_report_csv(table));
  log("csv written to " + csv_path.string());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Red-team testbed for retrieval-augmented fact-checking systems"};
  app.set_version_flag("--version", std::string(FACTGAUNTLET_CLI_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions opts;
  app.add_option("--config", opts.config_path, "Experiment config (JSON)");
  app.add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
  app.add_option("--seed", opts.seed, "Override rng_seed");
  app.add_flag("--trace", opts.trace, "Write prompt/completion transcripts to <out>/trace/");
  app.add_option("--set", opts.overrides, "Config override key=value (repeatable)");

  auto* probe = app.add_subcommand("probe", "Run the clean victim and build the eval set");
  auto* attack = app.add_subcommand("attack", "Craft poison sets for the eval set");
  auto* evaluate = app.add_subcommand("evaluate", "Inject, re-check and score");
  evaluate->add_option("--defense", opts.defense,
                       "Defense stages, e.g. cluster,perplexity,paraphrase or none");
  auto* report = app.add_subcommand("report", "Render a comparison table for completed runs");
  std::vector<std::string> run_ids;
  std::optional<std::string> baseline;
  report->add_option("run_ids", run_ids, "Run ids under <out>/results");
  report->add_option("--baseline", baseline, "Attack to test improvements against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*probe) return cmd_probe(opts);
    if (*attack) return cmd_attack(opts);
    if (*evaluate) return cmd_evaluate(opts);
    if (*report) return cmd_report(opts, run_ids, baseline);
  } catch (const UsageError& e) {
    log(e.what());
    return kExitUsage;
  } catch (const fg::ValidationError& e) {
    log(e.what());
    return kExitUsage;
  } catch (const fg::ParseError& e) {
    log(e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return kExitRunFailure;
  }
  return kExitUsage;
}
