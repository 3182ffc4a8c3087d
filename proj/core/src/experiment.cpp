#include "factgauntlet/experiment.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iterator>
#include <map>

#include "factgauntlet/bootstrap.hpp"
#include "factgauntlet/defense.hpp"
#include "factgauntlet/error.hpp"
#include "factgauntlet/http_client.hpp"
#include "factgauntlet/live_embedder.hpp"
#include "factgauntlet/openai_backend.hpp"
#include "factgauntlet/text.hpp"
#include "parallel.hpp"

#ifndef FACTGAUNTLET_VERSION
#define FACTGAUNTLET_VERSION "unknown"
#endif

namespace factgauntlet {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

HttpEndpointConfig endpoint_for(const BackendConfig& config, const std::string& base_url) {
  HttpEndpointConfig endpoint;
  endpoint.base_url = base_url;
  endpoint.api_key = api_key_from_env();
  endpoint.timeout = std::chrono::seconds(config.timeout_seconds);
  endpoint.retry.max_retries = config.max_retries;
  endpoint.max_concurrency = config.max_concurrency;
  endpoint.requests_per_second = config.requests_per_second;
  return endpoint;
}

std::string job_label(const AttackJob& job) {
  return job.attack + " rate " + format_rate(job.rate) + " trial " + std::to_string(job.trial) +
         " claim " + job.claim_id;
}

std::unique_ptr<RetrievalGuard> make_guard(const DefenseConfig& defense,
                                           std::shared_ptr<const PerplexityScorer> scorer) {
  if (!defense.cluster && !defense.perplexity) return nullptr;
  return std::make_unique<DefensePipeline>(defense, std::move(scorer));
}

}  // namespace

// ---------------------------------------------------------------------------
// Runtime

std::unique_ptr<LlmBackend> make_backend(const BackendConfig& config) {
  if (config.kind == "scripted")
    return std::make_unique<ScriptedBackend>(ScriptedBackend::from_file(config.rules_path));
  if (config.kind == "live")
    return std::make_unique<OpenAiChatBackend>(endpoint_for(config, config.base_url),
                                               config.model);
  throw ValidationError("unknown backend kind '" + config.kind + "'");
}

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config,
                                        const BackendConfig& backend) {
  if (config.kind == "hash") return std::make_unique<HashEmbedder>(config.dim, config.seed);
  if (config.kind == "live") {
    const auto& url = config.base_url.empty() ? backend.base_url : config.base_url;
    return std::make_unique<OpenAiEmbedder>(endpoint_for(backend, url), config.model, config.dim);
  }
  throw ValidationError("unknown embedder kind '" + config.kind + "'");
}

std::string backend_identity(const BackendConfig& config) {
  if (config.kind == "scripted")
    return "scripted-" + text::hex64(text::fnv1a64(read_file(config.rules_path)));
  return "live-" + text::hex64(text::fnv1a64(config.base_url + "|" + config.model));
}

Runtime::Runtime(const ExperimentConfig& config, bool trace)
    : owned_backend_(make_backend(config.backend)),
      owned_embedder_(make_embedder(config.embedder, config.backend)),
      identity_(factgauntlet::backend_identity(config.backend)) {
  if (trace) tracer_ = std::make_unique<TracingBackend>(*owned_backend_);
  active_ = tracer_ ? static_cast<const LlmBackend*>(tracer_.get()) : owned_backend_.get();
  embedder_ref_ = owned_embedder_.get();
}

Runtime::Runtime(const LlmBackend& backend, const Embedder& embedder, std::string identity)
    : active_(&backend), embedder_ref_(&embedder), identity_(std::move(identity)) {}

std::vector<Exchange> Runtime::exchanges() const {
  return tracer_ ? tracer_->exchanges() : std::vector<Exchange>{};
}

// ---------------------------------------------------------------------------
// Probing

ProbeCache::ProbeCache(fs::path root, VictimKind victim, const std::string& identity)
    : dir_(std::move(root) / (std::string(to_string(victim)) + "-" + text::file_safe(identity))) {}

std::optional<FactCheckReport> ProbeCache::load(const std::string& claim_id) const {
  const auto path = dir_ / (text::file_safe(claim_id) + ".json");
  if (!fs::exists(path)) return std::nullopt;
  try {
    return read_json(path).get<FactCheckReport>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void ProbeCache::store(const FactCheckReport& report) const {
  write_text_file(dir_ / (text::file_safe(report.claim_id) + ".json"),
                  nlohmann::json(report).dump(2) + "\n");
}

const FactCheckReport* EvalSet::probe_for(const std::string& claim_id) const {
  for (std::size_t i = 0; i < claim_ids.size() && i < probes.size(); ++i)
    if (claim_ids[i] == claim_id) return &probes[i];
  return nullptr;
}

nlohmann::json eval_set_to_json(const EvalSet& eval_set) {
  nlohmann::json excluded = nlohmann::json::array();
  for (const auto& e : eval_set.excluded)
    excluded.push_back({{"claim_id", e.claim_id}, {"reason", e.reason}});
  return nlohmann::json{{"claims", eval_set.claim_ids},
                        {"excluded", excluded},
                        {"warnings", eval_set.warnings}};
}

EvalSet build_eval_set(const Dataset& dataset, VictimKind victim, const VictimOptions& options,
                       const Embedder& embedder, const LlmBackend& backend,
                       std::size_t concurrency, const ProbeCache* cache) {
  std::vector<std::size_t> targets;
  for (std::size_t i = 0; i < dataset.claims.size(); ++i)
    if (dataset.claims[i].targetable()) targets.push_back(i);

  std::vector<std::optional<FactCheckReport>> reports(targets.size());
  std::vector<std::string> errors(targets.size());
  detail::parallel_for(targets.size(), concurrency, [&](std::size_t t) {
    const auto& claim = dataset.claims[targets[t]];
    try {
      if (cache) reports[t] = cache->load(claim.id);
      if (!reports[t]) {
        const VictimContext ctx{dataset.kbs[targets[t]], embedder, backend, nullptr};
        reports[t] = run_victim(victim, claim, ctx, options);
        if (cache) cache->store(*reports[t]);
      }
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
  });

  EvalSet out;
  std::size_t t = 0;
  for (std::size_t i = 0; i < dataset.claims.size(); ++i) {
    const auto& claim = dataset.claims[i];
    if (!claim.targetable()) {
      out.excluded.push_back(
          {claim.id, "gold label " + std::string(to_string(claim.gold_label)) +
                         " is not targetable"});
      continue;
    }
    const auto slot = t++;
    if (!errors[slot].empty()) {
      out.excluded.push_back({claim.id, "victim error: " + errors[slot]});
    } else if (reports[slot]->verdict != claim.gold_label) {
      out.excluded.push_back({claim.id, "pre-attack verdict " +
                                            std::string(to_string(reports[slot]->verdict)) +
                                            " differs from gold " +
                                            std::string(to_string(claim.gold_label))});
    } else {
      out.claim_ids.push_back(claim.id);
      out.probes.push_back(std::move(*reports[slot]));
    }
  }
  if (out.claim_ids.empty())
    out.warnings.push_back("eval set is empty: the victim verified no targetable claim correctly");
  return out;
}

EvalSet load_eval_set(const fs::path& eval_set_path, const ProbeCache& cache) {
  const auto j = read_json(eval_set_path);
  EvalSet out;
  try {
    out.claim_ids = j.at("claims").get<std::vector<std::string>>();
    for (const auto& e : j.value("excluded", nlohmann::json::array()))
      out.excluded.push_back(
          {e.at("claim_id").get<std::string>(), e.at("reason").get<std::string>()});
    out.warnings = j.value("warnings", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(eval_set_path.string() + ": " + e.what());
  }
  for (const auto& id : out.claim_ids) {
    auto probe = cache.load(id);
    if (!probe)
      throw ValidationError("no probe report for claim '" + id + "' in " + cache.dir().string() +
                            "; run `factgauntlet probe` first");
    out.probes.push_back(std::move(*probe));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Attacks

std::vector<AttackJob> plan_jobs(const ExperimentConfig& config, const EvalSet& eval_set) {
  std::vector<AttackJob> jobs;
  for (const auto& attack : config.attacks)
    for (const double rate : config.poison_rates)
      for (std::size_t trial = 0; trial < config.trials; ++trial)
        for (const auto& id : eval_set.claim_ids) jobs.push_back({attack, rate, trial, id});
  return jobs;
}

std::uint64_t job_seed(std::uint64_t rng_seed, const AttackJob& job) {
  const auto key = job.attack + "|" + format_rate(job.rate) + "|" + std::to_string(job.trial) +
                   "|" + job.claim_id;
  return text::fnv1a64(key, text::fnv1a64(std::to_string(rng_seed)));
}

fs::path PoisonStore::path_for(const AttackJob& job, bool error) const {
  return root_ / text::file_safe(job.attack) / ("rate-" + format_rate(job.rate)) /
         ("trial-" + std::to_string(job.trial)) /
         (text::file_safe(job.claim_id) + (error ? ".error.json" : ".json"));
}

void PoisonStore::store(const AttackOutcome& outcome) const {
  const auto ok_path = path_for(outcome.job, false);
  const auto err_path = path_for(outcome.job, true);
  if (outcome.failed()) {
    fs::remove(ok_path);
    write_text_file(err_path, nlohmann::json{{"error", outcome.error}}.dump(2) + "\n");
  } else if (outcome.poison) {
    fs::remove(err_path);
    write_text_file(ok_path, nlohmann::json(*outcome.poison).dump(2) + "\n");
  }
}

AttackOutcome PoisonStore::load(const AttackJob& job) const {
  AttackOutcome out{job, std::nullopt, {}};
  if (job.attack == "none") return out;
  const auto ok_path = path_for(job, false);
  const auto err_path = path_for(job, true);
  if (fs::exists(ok_path)) {
    try {
      out.poison = poison_set_from_json(read_json(ok_path));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(ok_path.string() + ": " + e.what());
    }
  } else if (fs::exists(err_path)) {
    out.error = read_json(err_path).value("error", std::string("attack failed"));
  } else {
    throw ValidationError("no poison set for " + job_label(job) + " (" + ok_path.string() +
                          "); run `factgauntlet attack` first");
  }
  return out;
}

std::vector<AttackOutcome> run_attacks(const ExperimentConfig& config, const Dataset& dataset,
                                       const EvalSet& eval_set, const LlmBackend& backend) {
  Fact2FictionOptions options;
  options.max_questions = config.max_questions;
  std::map<std::string, std::unique_ptr<Attack>> attacks;
  for (const auto& name : config.attacks)
    if (name != "none" && !attacks.contains(name)) attacks[name] = make_attack(name, &backend, options);

  const auto jobs = plan_jobs(config, eval_set);
  std::vector<AttackOutcome> outcomes(jobs.size());
  detail::parallel_for(jobs.size(), config.concurrency, [&](std::size_t i) {
    const auto& job = jobs[i];
    auto& out = outcomes[i];
    out.job = job;
    if (job.attack == "none") return;
    try {
      const auto idx = dataset.index_of(job.claim_id);
      const auto& claim = dataset.claims[idx];
      const auto m = compute_poison_count(job.rate, dataset.kbs[idx].clean_count());
      const AttackRequest request{claim, invert_label(claim.gold_label), m,
                                  eval_set.probe_for(claim.id), job_seed(config.rng_seed, job)};
      out.poison = attacks.at(job.attack)->craft(request);
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });
  return outcomes;
}

// ---------------------------------------------------------------------------
// Evaluation

double ExperimentResult::error_fraction() const noexcept {
  return job_count == 0 ? 0.0
                        : static_cast<double>(failures.size()) / static_cast<double>(job_count);
}

bool ExperimentResult::failed() const noexcept { return error_fraction() > kMaxErrorFraction; }

std::vector<PValueEntry> compute_pvalues(const ExperimentConfig& config,
                                         const std::vector<ClaimResult>& results) {
  using Key = std::pair<std::string, std::size_t>;  // (claim, trial)
  std::map<std::pair<std::string, double>, std::map<Key, const ClaimResult*>> cells;
  for (const auto& r : results) cells[{r.attack, r.rate}][{r.claim_id, r.trial}] = &r;

  std::vector<PValueEntry> out;
  for (const double rate : config.poison_rates) {
    for (const auto& a : config.attacks) {
      for (const auto& b : config.attacks) {
        if (a == b) continue;
        const auto& cell_a = cells[{a, rate}];
        const auto& cell_b = cells[{b, rate}];
        for (const std::string metric : {"asr", "sfr"}) {
          std::vector<int> sa, sb;
          for (const auto& [key, ra] : cell_a) {
            const auto it = cell_b.find(key);
            if (it == cell_b.end()) continue;
            const auto success = [&](const ClaimResult& r) {
              return metric == "asr" ? int{r.outcome == OutcomeClass::Inverted}
                                     : int{is_failure(r.outcome)};
            };
            sa.push_back(success(*ra));
            sb.push_back(success(*it->second));
          }
          PValueEntry entry{rate, a, b, metric, sa.size(), std::nullopt};
          if (sa.size() >= 2) {
            const auto seed = text::fnv1a64(a + "|" + b + "|" + format_rate(rate) + "|" + metric,
                                            text::fnv1a64(std::to_string(config.rng_seed)));
            entry.p = paired_bootstrap(sa, sb, config.bootstrap_resamples, seed);
          }
          out.push_back(std::move(entry));
        }
      }
    }
  }
  return out;
}

ExperimentResult evaluate(const ExperimentConfig& config, const Dataset& dataset,
                          const EvalSet& eval_set, const std::vector<AttackOutcome>& attacks,
                          const Runtime& runtime) {
  const auto& defense = config.defense;
  const VictimOptions victim_options{config.k, config.max_questions};

  // Per-claim defense state, prepared once before the concurrent checks.
  struct ClaimState {
    std::optional<Claim> checked;
    std::shared_ptr<const PerplexityScorer> scorer;
    std::unique_ptr<RetrievalGuard> guard;
    std::string error;
  };
  std::shared_ptr<const PerplexityScorer> remote_scorer;
  if (defense.perplexity && defense.perplexity_scorer == "remote")
    remote_scorer = std::make_shared<RemoteLogprobScorer>(
        endpoint_for(config.backend, config.backend.base_url), defense.perplexity_model);

  std::vector<ClaimState> states(eval_set.claim_ids.size());
  detail::parallel_for(states.size(), config.concurrency, [&](std::size_t c) {
    auto& state = states[c];
    try {
      const auto idx = dataset.index_of(eval_set.claim_ids[c]);
      const auto& claim = dataset.claims[idx];
      state.checked = defense.paraphrase ? paraphrase_claim(claim, runtime.backend()) : claim;
      if (defense.perplexity) {
        if (remote_scorer) {
          state.scorer = remote_scorer;
        } else {
          std::vector<std::string> corpus;
          for (const auto& e : dataset.kbs[idx].entries()) corpus.push_back(e.evidence.text());
          state.scorer = std::make_shared<CharBigramScorer>(CharBigramScorer::fit(corpus));
        }
      }
      state.guard = make_guard(defense, state.scorer);
    } catch (const std::exception& e) {
      state.error = e.what();
    }
  });
  std::map<std::string, std::size_t> state_index;
  for (std::size_t c = 0; c < eval_set.claim_ids.size(); ++c)
    state_index[eval_set.claim_ids[c]] = c;

  struct JobOutput {
    std::optional<ClaimResult> result;
    std::optional<FactCheckReport> report;
    std::optional<ClaimFailure> failure;
  };
  std::vector<JobOutput> outputs(attacks.size());
  detail::parallel_for(attacks.size(), config.concurrency, [&](std::size_t i) {
    const auto& outcome = attacks[i];
    auto& out = outputs[i];
    if (outcome.failed()) {
      out.failure = ClaimFailure{outcome.job, "attack", outcome.error};
      return;
    }
    try {
      const auto& state = states.at(state_index.at(outcome.job.claim_id));
      if (!state.error.empty()) throw Error(state.error);
      const auto idx = dataset.index_of(outcome.job.claim_id);
      const auto& claim = dataset.claims[idx];
      const auto& clean = dataset.kbs[idx];
      const auto* probe = eval_set.probe_for(claim.id);
      if (!probe) throw ValidationError("claim is not in the eval set");

      std::optional<KnowledgeBase> poisoned;
      if (outcome.poison && !outcome.poison->evidences.empty())
        poisoned = inject(clean, outcome.poison->evidences, runtime.embedder());
      const KnowledgeBase& kb = poisoned ? *poisoned : clean;

      const VictimContext ctx{kb, runtime.embedder(), runtime.backend(), state.guard.get()};
      auto report = run_victim(config.victim, *state.checked, ctx, victim_options);

      ClaimResult r;
      r.claim_id = claim.id;
      r.attack = outcome.job.attack;
      r.rate = outcome.job.rate;
      r.trial = outcome.job.trial;
      r.gold = claim.gold_label;
      r.pre_verdict = probe->verdict;
      r.post_verdict = report.verdict;
      r.outcome = classify_outcome(claim.gold_label, report.verdict);
      r.injected_count = outcome.poison ? outcome.poison->evidences.size() : 0;
      r.retrieved_total = report.retrieved_total();
      r.retrieved_malicious = report.retrieved_malicious();
      out.result = std::move(r);
      out.report = std::move(report);
    } catch (const std::exception& e) {
      out.failure = ClaimFailure{outcome.job, "evaluate", e.what()};
    }
  });

  ExperimentResult result;
  result.run_id = compute_run_id(config);
  result.job_count = attacks.size();
  for (auto& out : outputs) {
    if (out.failure) {
      result.failures.push_back(std::move(*out.failure));
    } else {
      result.results.push_back(std::move(*out.result));
      result.reports.push_back(std::move(*out.report));
    }
  }

  for (const auto& attack : config.attacks) {
    for (const double rate : config.poison_rates) {
      SummaryRow row;
      row.attack = attack;
      row.victim = std::string(to_string(config.victim));
      row.defense = defense.label();
      row.rate = rate;
      std::vector<ClaimResult> cell;
      for (const auto& r : result.results)
        if (r.attack == attack && r.rate == rate) cell.push_back(r);
      for (const auto& f : result.failures)
        if (f.job.attack == attack && f.job.rate == rate) ++row.failures;
      if (!cell.empty()) {
        const auto summary = compute_metrics(cell);
        row.metrics = summary.overall;
        row.per_claim_sir = summary.per_claim_sir;
      }
      result.summary.push_back(std::move(row));
    }
  }
  result.pvalues = compute_pvalues(config, result.results);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Runtime& runtime) {
  config.validate();
  const auto dataset = load_dataset(config.dataset_path, runtime.embedder());
  const auto eval_set =
      build_eval_set(dataset, config.victim, VictimOptions{config.k, config.max_questions},
                     runtime.embedder(), runtime.backend(), config.concurrency);
  const auto attacks = run_attacks(config, dataset, eval_set, runtime.backend());
  return evaluate(config, dataset, eval_set, attacks, runtime);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const Runtime runtime(config);
  return run_experiment(config, runtime);
}

// ---------------------------------------------------------------------------
// Persistence

void to_json(nlohmann::json& j, const RunManifest& m) {
  j = nlohmann::json{{"run_id", m.run_id},
                     {"stage", m.stage},
                     {"config", m.config},
                     {"dataset_fingerprint", m.dataset_fingerprint},
                     {"rng_seed", m.rng_seed},
                     {"started_at", m.started_at},
                     {"finished_at", m.finished_at},
                     {"versions", m.versions},
                     {"protocol", m.protocol}};
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest make_manifest(const ExperimentConfig& config, std::string stage) {
  RunManifest m;
  m.run_id = compute_run_id(config);
  m.stage = std::move(stage);
  m.config = config_to_json(config);
  m.dataset_fingerprint =
      fs::exists(config.dataset_path / "claims.json") ? dataset_fingerprint(config.dataset_path) : "";
  m.rng_seed = config.rng_seed;
  m.started_at = utc_timestamp();
  m.versions = {{"factgauntlet", FACTGAUNTLET_VERSION},
                {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                {"compiler", __VERSION__}};
  m.protocol = {
      {"prompt_messages", "each template rendered as a single user message"},
      {"embeddings", config.embedder.kind == "hash" ? "hash embedder, L2-normalized bag of tokens"
                                                    : "raw endpoint output, not re-normalized"},
      {"agentic_aggregation", "free-text synthesis ending in a VERDICT line"},
      {"query_sampling", "uniform over each sub-question's planned queries"},
      {"executor_corpora", "generated independently per evidence"},
      {"significance", "one-sided paired bootstrap over pooled (claim, trial) pairs"}};
  return m;
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out << text;
    if (!out) throw ValidationError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_results(const fs::path& dir, const ExperimentResult& result,
                   const ExperimentConfig& config, const RunManifest& manifest) {
  const auto victim = std::string(to_string(config.victim));
  const auto defense = config.defense.label();

  std::string claims;
  for (const auto& r : result.results) {
    nlohmann::json j = r;
    j["victim"] = victim;
    j["defense"] = defense;
    claims += j.dump() + "\n";
  }
  for (const auto& f : result.failures) {
    claims += nlohmann::json{{"claim_id", f.job.claim_id},
                             {"attack", f.job.attack},
                             {"rate", f.job.rate},
                             {"trial", f.job.trial},
                             {"victim", victim},
                             {"defense", defense},
                             {"stage", f.stage},
                             {"error", f.message}}
                  .dump() +
              "\n";
  }
  write_text_file(dir / "claims.jsonl", claims);

  std::string reports;
  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    const auto& r = result.results[i];
    reports += nlohmann::json{{"attack", r.attack},
                              {"rate", r.rate},
                              {"trial", r.trial},
                              {"report", result.reports[i]}}
                   .dump() +
               "\n";
  }
  write_text_file(dir / "reports.jsonl", reports);

  const nlohmann::json summary{{"run_id", result.run_id},
                               {"rng_seed", config.rng_seed},
                               {"rows", result.summary},
                               {"job_count", result.job_count},
                               {"failure_count", result.failures.size()},
                               {"error_fraction", result.error_fraction()},
                               {"failed", result.failed()}};
  write_text_file(dir / "summary.json", summary.dump(2) + "\n");
  write_text_file(dir / "summary.csv", summary_csv(result.summary));

  const nlohmann::json pvalues{
      {"run_id", result.run_id},
      {"baseline_attack",
       config.baseline_attack ? nlohmann::json(*config.baseline_attack) : nlohmann::json()},
      {"alpha", kSignificanceLevel},
      {"resamples", config.bootstrap_resamples},
      {"entries", result.pvalues}};
  write_text_file(dir / "pvalues.json", pvalues.dump(2) + "\n");

  auto finished = manifest;
  finished.finished_at = utc_timestamp();
  write_text_file(dir / "manifest.json", nlohmann::json(finished).dump(2) + "\n");
}

}  // namespace factgauntlet
