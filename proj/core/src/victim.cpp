#include "factgauntlet/victim.hpp"

#include <algorithm>
#include <unordered_set>

#include "factgauntlet/error.hpp"
#include "factgauntlet/payload.hpp"
#include "factgauntlet/prompts.hpp"
#include "factgauntlet/text.hpp"

namespace factgauntlet {

namespace {

constexpr std::string_view kVerdictReprompt =
    "\n\nYour previous response did not end with a line of the form \"VERDICT: <verdict>\". "
    "Respond again and finish with that line.";

struct Retrieved {
  RetrievalEvent event;
  std::vector<const KbEntry*> entries;
};

Retrieved retrieve_logged(const VictimContext& ctx, const std::string& query, std::size_t k) {
  Retrieved out;
  out.event.query = query;
  if (ctx.kb.empty()) return out;

  auto hits = search(ctx.kb, ctx.embedder.embed(query), k);
  if (ctx.guard) {
    auto filtered = ctx.guard->filter(ctx.kb, hits);
    hits = std::move(filtered.kept);
    out.event.dropped = std::move(filtered.dropped);
  }
  for (const auto& hit : hits) {
    const auto& entry = ctx.kb.entries()[hit.index];
    out.event.retrieved_ids.push_back(entry.evidence.id());
    out.event.malicious.push_back(entry.evidence.is_malicious());
    out.entries.push_back(&entry);
  }
  return out;
}

std::string format_evidence(std::span<const KbEntry* const> entries) {
  if (entries.empty()) return "(no evidence retrieved)";
  std::string out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i) out += '\n';
    out += "[" + std::to_string(i + 1) + "] " + entries[i]->evidence.text();
  }
  return out;
}

std::string strip_verdict_lines(std::string_view text) {
  std::string out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    if (!text::contains_icase(line, "verdict:")) {
      out.append(line);
      out += '\n';
    }
    start = end + 1;
  }
  return std::string(text::trim(out));
}

struct VerdictReply {
  VeracityLabel verdict;
  std::string justification;
};

// One completion, one reprompt on a missing/unknown sentinel, then ParseError.
VerdictReply ask_for_verdict(const LlmBackend& backend, const std::string& prompt) {
  std::string reply = complete(backend, prompt);
  VeracityLabel verdict;
  try {
    verdict = parse_verdict(reply);
  } catch (const ParseError&) {
    reply = complete(backend, prompt + std::string(kVerdictReprompt));
    verdict = parse_verdict(reply);
  }
  std::string justification = strip_verdict_lines(reply);
  if (justification.empty())
    justification = "Verdict given without further explanation: " +
                    std::string(display_name(verdict)) + ".";
  return {verdict, std::move(justification)};
}

}  // namespace

std::size_t RetrievalEvent::malicious_count() const noexcept {
  return static_cast<std::size_t>(std::count(malicious.begin(), malicious.end(), true));
}

std::size_t FactCheckReport::retrieved_total() const noexcept {
  std::size_t n = 0;
  for (const auto& e : retrieval_log) n += e.retrieved_ids.size();
  return n;
}

std::size_t FactCheckReport::retrieved_malicious() const noexcept {
  std::size_t n = 0;
  for (const auto& e : retrieval_log) n += e.malicious_count();
  return n;
}

void to_json(nlohmann::json& j, const DroppedEvidence& d) {
  j = nlohmann::json{{"id", d.id}, {"reason", d.reason}};
}

void from_json(const nlohmann::json& j, DroppedEvidence& d) {
  d.id = j.at("id").get<std::string>();
  d.reason = j.at("reason").get<std::string>();
}

void to_json(nlohmann::json& j, const RetrievalEvent& e) {
  j = nlohmann::json{{"query", e.query},
                     {"retrieved_ids", e.retrieved_ids},
                     {"malicious", e.malicious},
                     {"dropped", e.dropped}};
}

void from_json(const nlohmann::json& j, RetrievalEvent& e) {
  e.query = j.at("query").get<std::string>();
  e.retrieved_ids = j.at("retrieved_ids").get<std::vector<std::string>>();
  e.malicious = j.at("malicious").get<std::vector<bool>>();
  e.dropped = j.value("dropped", std::vector<DroppedEvidence>{});
}

void to_json(nlohmann::json& j, const SubQuestionRecord& r) {
  j = nlohmann::json{{"question", r.question},
                     {"queries", r.queries},
                     {"retrieved_ids", r.retrieved_ids},
                     {"answer", r.answer}};
}

void from_json(const nlohmann::json& j, SubQuestionRecord& r) {
  r.question = j.at("question").get<std::string>();
  r.queries = j.at("queries").get<std::vector<std::string>>();
  r.retrieved_ids = j.at("retrieved_ids").get<std::vector<std::string>>();
  r.answer = j.at("answer").get<std::string>();
}

void to_json(nlohmann::json& j, const FactCheckReport& r) {
  j = nlohmann::json{{"claim_id", r.claim_id},
                     {"verdict", r.verdict},
                     {"justification", r.justification},
                     {"sub_records", r.sub_records},
                     {"retrieval_log", r.retrieval_log},
                     {"warnings", r.warnings}};
}

void from_json(const nlohmann::json& j, FactCheckReport& r) {
  r.claim_id = j.at("claim_id").get<std::string>();
  r.verdict = j.at("verdict").get<VeracityLabel>();
  r.justification = j.at("justification").get<std::string>();
  r.sub_records = j.at("sub_records").get<std::vector<SubQuestionRecord>>();
  r.retrieval_log = j.at("retrieval_log").get<std::vector<RetrievalEvent>>();
  r.warnings = j.value("warnings", std::vector<std::string>{});
}

std::string_view to_string(VictimKind kind) noexcept {
  return kind == VictimKind::Simple ? "simple" : "agentic";
}

VictimKind victim_from_string(std::string_view name) {
  const auto lower = text::to_lower(name);
  if (lower == "simple") return VictimKind::Simple;
  if (lower == "agentic" || lower == "infact") return VictimKind::Agentic;
  throw ValidationError("unknown victim '" + std::string(name) + "' (expected simple|agentic)");
}

VeracityLabel parse_verdict(std::string_view reply) {
  std::optional<std::string_view> last;
  std::size_t start = 0;
  while (start <= reply.size()) {
    auto end = reply.find('\n', start);
    if (end == std::string_view::npos) end = reply.size();
    const auto line = reply.substr(start, end - start);
    const auto lower = text::to_lower(line);
    if (const auto at = lower.find("verdict:"); at != std::string::npos)
      last = line.substr(at + std::string_view("verdict:").size());
    start = end + 1;
  }
  if (!last) throw ParseError("no VERDICT: line in model output", std::string(reply));
  if (auto label = parse_label(*last)) return *label;
  throw ParseError("unknown verdict label '" + std::string(text::trim(*last)) + "'",
                   std::string(reply));
}

FactCheckReport simple_check(const Claim& claim, const VictimContext& ctx,
                             const VictimOptions& options) {
  claim.validate();
  FactCheckReport report;
  report.claim_id = claim.id;

  auto retrieved = retrieve_logged(ctx, claim.text, options.k);
  const auto prompt = render_prompt(
      TemplateId::SimpleVerdict,
      {{"CLAIM", claim.text}, {"EVIDENCE", format_evidence(retrieved.entries)}});
  report.retrieval_log.push_back(std::move(retrieved.event));

  auto reply = ask_for_verdict(ctx.backend, prompt);
  report.verdict = reply.verdict;
  report.justification = std::move(reply.justification);
  return report;
}

FactCheckReport agentic_check(const Claim& claim, const VictimContext& ctx,
                              const VictimOptions& options) {
  claim.validate();
  if (options.max_questions < 1 || options.max_questions > 10)
    throw ValidationError("max_questions must be within [1, 10]");

  const auto decomposition = complete(
      ctx.backend, render_prompt(TemplateId::Decompose,
                                 {{"CLAIM", claim.text},
                                  {"N_QUESTIONS", std::to_string(options.max_questions)}}));
  const auto questions = extract_enumerated_questions(decomposition, options.max_questions);
  if (questions.empty()) {
    auto report = simple_check(claim, ctx, options);
    report.warnings.push_back("decomposition produced no questions; fell back to simple check");
    return report;
  }

  FactCheckReport report;
  report.claim_id = claim.id;
  std::string qa_pairs;
  for (std::size_t q = 0; q < questions.size(); ++q) {
    SubQuestionRecord record;
    record.question = questions[q];

    const auto plan = complete(ctx.backend, render_prompt(TemplateId::QueryPlan,
                                                          {{"CLAIM", claim.text},
                                                           {"QUESTION", record.question}}));
    record.queries = extract_backticked(plan, 5);
    if (record.queries.empty()) {
      record.queries.push_back(record.question);
      report.warnings.push_back("question " + std::to_string(q + 1) +
                                ": no back-ticked queries; searched with the question itself");
    }

    std::vector<const KbEntry*> evidence;
    std::unordered_set<std::string> seen;
    for (const auto& query : record.queries) {
      auto retrieved = retrieve_logged(ctx, query, options.k);
      for (const auto* entry : retrieved.entries) {
        if (seen.insert(entry->evidence.id()).second) {
          record.retrieved_ids.push_back(entry->evidence.id());
          evidence.push_back(entry);
        }
      }
      report.retrieval_log.push_back(std::move(retrieved.event));
    }

    record.answer = std::string(text::trim(complete(
        ctx.backend, render_prompt(TemplateId::SubQuestionAnswer,
                                   {{"CLAIM", claim.text},
                                    {"QUESTION", record.question},
                                    {"EVIDENCE", format_evidence(evidence)}}))));

    qa_pairs += "Q" + std::to_string(q + 1) + ": " + record.question + "\n";
    qa_pairs += "A" + std::to_string(q + 1) + ": " + record.answer + "\n";
    report.sub_records.push_back(std::move(record));
  }

  auto reply = ask_for_verdict(
      ctx.backend, render_prompt(TemplateId::Aggregate, {{"CLAIM", claim.text},
                                                         {"QA_PAIRS", std::string(text::trim(qa_pairs))}}));
  report.verdict = reply.verdict;
  report.justification = std::move(reply.justification);
  return report;
}

FactCheckReport run_victim(VictimKind kind, const Claim& claim, const VictimContext& ctx,
                           const VictimOptions& options) {
  return kind == VictimKind::Simple ? simple_check(claim, ctx, options)
                                    : agentic_check(claim, ctx, options);
}

}  // namespace factgauntlet
