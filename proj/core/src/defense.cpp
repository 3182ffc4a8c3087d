#include "factgauntlet/defense.hpp"

#include <algorithm>
#include <cmath>

#include "factgauntlet/error.hpp"
#include "factgauntlet/prompts.hpp"
#include "factgauntlet/text.hpp"

namespace factgauntlet {

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw ValidationError("quantile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("quantile must be within [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<bool> ppl_keep_mask(std::span<const double> scores, double threshold_quantile) {
  if (!(threshold_quantile > 0.0 && threshold_quantile <= 1.0))
    throw ValidationError("perplexity threshold quantile must be within (0, 1]");
  std::vector<bool> keep(scores.size(), true);
  if (scores.empty()) return keep;
  const double threshold = quantile(scores, threshold_quantile);
  for (std::size_t i = 0; i < scores.size(); ++i) keep[i] = !(scores[i] > threshold);
  return keep;
}

std::vector<Evidence> ppl_filter(std::span<const Evidence> evidences,
                                 const PerplexityScorer& scorer, double threshold_quantile) {
  std::vector<double> scores;
  scores.reserve(evidences.size());
  for (const auto& e : evidences) scores.push_back(scorer.score(e.text()));
  const auto keep = ppl_keep_mask(scores, threshold_quantile);
  std::vector<Evidence> out;
  for (std::size_t i = 0; i < evidences.size(); ++i)
    if (keep[i]) out.push_back(evidences[i]);
  return out;
}

Claim paraphrase_claim(const Claim& claim, const LlmBackend& backend) {
  Claim out = claim;
  out.text = std::string(
      text::trim(complete(backend, render_prompt(TemplateId::Paraphrase, {{"CLAIM", claim.text}}))));
  if (out.text.empty()) throw EmptyResponseError("paraphrase of claim '" + claim.id + "' is empty");
  return out;
}

std::string DefenseConfig::label() const {
  std::vector<std::string> parts;
  if (paraphrase) parts.emplace_back("paraphrase");
  if (cluster) parts.emplace_back("cluster");
  if (perplexity) parts.emplace_back("perplexity");
  return parts.empty() ? "none" : text::join(parts, "+");
}

void DefenseConfig::validate() const {
  if (cluster) cluster_config.validate();
  if (perplexity && !(perplexity_quantile > 0.0 && perplexity_quantile <= 1.0))
    throw ValidationError("defense.perplexity.quantile must be within (0, 1]");
  if (perplexity_scorer != "char-bigram" && perplexity_scorer != "remote")
    throw ValidationError("defense.perplexity.scorer must be char-bigram or remote");
}

void to_json(nlohmann::json& j, const DefenseConfig& c) {
  j = nlohmann::json{
      {"paraphrase", c.paraphrase},
      {"cluster",
       {{"enabled", c.cluster},
        {"density_ratio_threshold", c.cluster_config.density_ratio_threshold},
        {"max_iters", c.cluster_config.max_iters},
        {"seed", c.cluster_config.seed}}},
      {"perplexity",
       {{"enabled", c.perplexity},
        {"quantile", c.perplexity_quantile},
        {"scorer", c.perplexity_scorer},
        {"model", c.perplexity_model}}}};
}

void from_json(const nlohmann::json& j, DefenseConfig& c) {
  c = DefenseConfig{};
  c.paraphrase = j.value("paraphrase", false);
  if (j.contains("cluster")) {
    const auto& cl = j.at("cluster");
    if (cl.is_boolean()) {
      c.cluster = cl.get<bool>();
    } else {
      c.cluster = cl.value("enabled", true);
      c.cluster_config.density_ratio_threshold =
          cl.value("density_ratio_threshold", c.cluster_config.density_ratio_threshold);
      c.cluster_config.max_iters = cl.value("max_iters", c.cluster_config.max_iters);
      c.cluster_config.seed = cl.value("seed", c.cluster_config.seed);
    }
  }
  if (j.contains("perplexity")) {
    const auto& pp = j.at("perplexity");
    if (pp.is_boolean()) {
      c.perplexity = pp.get<bool>();
    } else {
      c.perplexity = pp.value("enabled", true);
      c.perplexity_quantile = pp.value("quantile", c.perplexity_quantile);
      c.perplexity_scorer = pp.value("scorer", c.perplexity_scorer);
      c.perplexity_model = pp.value("model", c.perplexity_model);
    }
  }
}

DefensePipeline::DefensePipeline(DefenseConfig config,
                                 std::shared_ptr<const PerplexityScorer> scorer)
    : config_(std::move(config)), scorer_(std::move(scorer)) {
  config_.validate();
  if (config_.perplexity && !scorer_)
    throw ValidationError("perplexity defense needs a scorer");
}

RetrievalGuard::Outcome DefensePipeline::filter(const KnowledgeBase& kb,
                                                std::span<const RetrievalHit> hits) const {
  Outcome out;
  out.kept.assign(hits.begin(), hits.end());

  const auto apply = [&](const std::vector<bool>& keep, const char* reason) {
    std::vector<RetrievalHit> kept;
    for (std::size_t i = 0; i < out.kept.size(); ++i) {
      if (keep[i])
        kept.push_back(out.kept[i]);
      else
        out.dropped.push_back({kb.entries()[out.kept[i].index].evidence.id(), reason});
    }
    out.kept = std::move(kept);
  };

  if (config_.cluster) {
    std::vector<EmbeddingVector> vectors;
    for (const auto& hit : out.kept) vectors.push_back(kb.entries()[hit.index].embedding);
    apply(cluster_keep_mask(vectors, config_.cluster_config), "cluster");
  }
  if (config_.perplexity && !out.kept.empty()) {
    std::vector<double> scores;
    for (const auto& hit : out.kept)
      scores.push_back(scorer_->score(kb.entries()[hit.index].evidence.text()));
    apply(ppl_keep_mask(scores, config_.perplexity_quantile), "perplexity");
  }
  return out;
}

}  // namespace factgauntlet
