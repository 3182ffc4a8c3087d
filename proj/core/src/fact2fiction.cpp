#include "factgauntlet/fact2fiction.hpp"

#include <random>

#include "factgauntlet/allocation.hpp"
#include "factgauntlet/error.hpp"
#include "factgauntlet/prompts.hpp"
#include "factgauntlet/text.hpp"
#include "parallel.hpp"

namespace factgauntlet {

namespace {

constexpr std::string_view kAnswerCountReprompt =
    "\n\nYour previous response did not contain exactly one answer per question. Respond again "
    "with one JSON answer object for every question, in the given order.";
constexpr std::string_view kImportanceReprompt =
    "\n\nYour previous response was not valid JSON. Respond again with only the JSON object.";
constexpr double kDefaultWeight = 5.0;

void warn(Warnings* warnings, std::string message) {
  if (warnings) warnings->push_back(std::move(message));
}

std::string numbered(std::span<const std::string> questions) {
  std::string out;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    if (i) out += '\n';
    out += std::to_string(i + 1) + ". " + questions[i];
  }
  return out;
}

std::string qa_rows(std::span<const PlannedAnswer> all_qa) {
  std::string out;
  for (std::size_t i = 0; i < all_qa.size(); ++i) {
    if (i) out += '\n';
    const auto n = std::to_string(i + 1);
    out += "Question " + n + ": " + all_qa[i].question + "\n";
    out += "Answer " + n + ": " + all_qa[i].answer;
  }
  return out;
}

// The executor prompt already ends the answer with a period.
std::string_view without_final_period(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && s.back() == '.') s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> f2f_decompose(const Claim& claim, const LlmBackend& backend,
                                       std::size_t max_q) {
  if (max_q < 1 || max_q > 10) throw ValidationError("max_q must be within [1, 10]");
  const auto prompt = render_prompt(
      TemplateId::Decompose, {{"CLAIM", claim.text}, {"N_QUESTIONS", std::to_string(max_q)}});
  std::string reply = complete(backend, prompt);
  auto questions = extract_enumerated_questions(reply, max_q);
  if (questions.empty()) {
    reply = complete(backend, prompt);
    questions = extract_enumerated_questions(reply, max_q);
  }
  if (questions.empty())
    throw ParseError("decomposition of claim '" + claim.id + "' yielded no questions", reply);
  return questions;
}

std::vector<PlannedAnswer> f2f_plan_answers(const Claim& claim, std::string_view justification,
                                            VeracityLabel target,
                                            std::span<const std::string> questions,
                                            const LlmBackend& backend, bool use_justification) {
  if (questions.empty()) throw ValidationError("answer planning needs at least one question");
  if (use_justification && text::trim(justification).empty())
    throw ValidationError("answer planning needs the probe justification");

  const Bindings bindings{{"CLAIM", claim.text},
                          {"JUSTIFICATION", use_justification ? std::string(justification) : ""},
                          {"TARGET_VERDICT", std::string(display_name(target))},
                          {"QUESTIONS_LIST", numbered(questions)},
                          {"KEYWORD", std::string(answer_plan_keyword(target))}};
  const auto prompt = render_prompt(
      use_justification ? TemplateId::AnswerPlan : TemplateId::AnswerPlanUntargeted, bindings);

  const auto attempt = [&](const std::string& p) -> std::optional<std::vector<PlannedAnswer>> {
    const auto reply = complete(backend, p);
    try {
      auto parsed = parse_answer_plan(reply);
      if (parsed.answers.size() != questions.size()) return std::nullopt;
      return std::move(parsed.answers);
    } catch (const ParseError&) {
      return std::nullopt;
    }
  };

  auto answers = attempt(prompt);
  if (!answers) answers = attempt(prompt + std::string(kAnswerCountReprompt));
  if (!answers)
    throw ParseError("answer planning for claim '" + claim.id + "' did not return " +
                         std::to_string(questions.size()) + " answers",
                     prompt);
  // The planner's own questions are authoritative; the model may rephrase them.
  for (std::size_t i = 0; i < questions.size(); ++i) (*answers)[i].question = questions[i];
  return *std::move(answers);
}

double f2f_weigh(const Claim& claim, std::string_view justification,
                 VeracityLabel original_verdict, std::span<const PlannedAnswer> all_qa,
                 std::size_t focus_index, const LlmBackend& backend, Warnings* warnings) {
  if (focus_index >= all_qa.size()) throw ValidationError("focus_index out of range");
  const auto prompt =
      render_prompt(TemplateId::ImportanceScore,
                    {{"CLAIM", claim.text},
                     {"JUSTIFICATION", std::string(justification)},
                     {"ORIGINAL_VERDICT", std::string(display_name(original_verdict))},
                     {"QA_PAIRS", qa_rows(all_qa)},
                     {"CURRENT_QUESTION", all_qa[focus_index].question}});
  const auto label = "question " + std::to_string(focus_index + 1);

  for (const auto& p : {prompt, prompt + std::string(kImportanceReprompt)}) {
    try {
      const auto parsed = parse_importance(complete(backend, p));
      if (parsed.clamped) warn(warnings, label + ": importance score clamped into [0, 10]");
      return parsed.importance_score;
    } catch (const ParseError&) {
    }
  }
  warn(warnings, label + ": importance score unparseable; using default weight 5");
  return kDefaultWeight;
}

std::vector<std::string> f2f_plan_queries(const Claim& claim, std::string_view question,
                                          const LlmBackend& backend, std::size_t max_u,
                                          Warnings* warnings) {
  if (max_u < 1 || max_u > 5) throw ValidationError("max_u must be within [1, 5]");
  const auto reply = complete(backend, render_prompt(TemplateId::QueryPlan,
                                                     {{"CLAIM", claim.text},
                                                      {"QUESTION", std::string(question)}}));
  auto queries = extract_backticked(reply, max_u);
  if (queries.empty()) {
    warn(warnings, "no back-ticked queries for \"" + std::string(question) +
                       "\"; using the question itself");
    queries.emplace_back(question);
  }
  return queries;
}

AttackPlan f2f_plan(const Claim& claim, const FactCheckReport& probe, VeracityLabel target,
                    std::size_t m, const LlmBackend& backend, const Fact2FictionOptions& options,
                    Warnings* warnings) {
  check_attack_target(claim, target);

  AttackPlan plan;
  plan.claim_id = claim.id;
  plan.claim_text = claim.text;
  plan.target_verdict = target;
  plan.total_budget_requested = m;

  const auto questions = f2f_decompose(claim, backend, options.max_questions);
  const auto answers = f2f_plan_answers(claim, probe.justification, target, questions, backend,
                                        options.answer_planning);

  std::vector<double> weights(answers.size(), 1.0);
  if (options.budget_planning) {
    for (std::size_t k = 0; k < answers.size(); ++k)
      weights[k] = f2f_weigh(claim, probe.justification, probe.verdict, answers, k, backend,
                             warnings);
    if (all_weights_zero(weights))
      warn(warnings, "all importance weights are zero; budget split uniformly");
  }
  const auto budgets = f2f_allocate(m, weights);

  for (std::size_t k = 0; k < answers.size(); ++k) {
    SubQuestionPlan sub;
    sub.question = answers[k].question;
    sub.adversarial_answer = answers[k].answer;
    sub.weight = weights[k];
    sub.budget = budgets[k];
    if (options.query_planning)
      sub.queries = f2f_plan_queries(claim, sub.question, backend, options.max_queries, warnings);
    else
      sub.queries = {claim.text};
    plan.total_budget_allocated += sub.budget;
    plan.sub_plans.push_back(std::move(sub));
  }
  return plan;
}

PoisonSet f2f_execute(const AttackPlan& plan, const LlmBackend& backend, std::uint64_t rng_seed,
                      std::string attack_name, std::size_t concurrency) {
  if (plan.sub_plans.empty() || plan.sub_plans.size() > 10)
    throw ValidationError("attack plan must have 1 to 10 sub-questions");

  struct Job {
    std::size_t k;
    std::size_t h;
    const std::string* query;
  };
  std::vector<Job> jobs;
  std::mt19937_64 rng(rng_seed);
  for (std::size_t k = 0; k < plan.sub_plans.size(); ++k) {
    const auto& sub = plan.sub_plans[k];
    if (sub.budget > 0 && sub.queries.empty())
      throw ValidationError("sub-question " + std::to_string(k) + " has budget but no queries");
    for (std::size_t h = 0; h < sub.budget; ++h)
      jobs.push_back({k, h, &sub.queries[rng() % sub.queries.size()]});
  }

  const auto keyword = std::string(executor_keyword(plan.target_verdict));
  std::vector<std::string> corpora(jobs.size());
  detail::parallel_for(jobs.size(), concurrency, [&](std::size_t i) {
    const auto& sub = plan.sub_plans[jobs[i].k];
    CompletionRequest request;
    request.prompt = render_prompt(
        TemplateId::ExecutorCorpus,
        {{"CLAIM", plan.claim_text},
         {"QUESTION", sub.question},
         {"ADVERSARIAL_ANSWER", std::string(without_final_period(sub.adversarial_answer))},
         {"KEYWORD", keyword}});
    request.seed = static_cast<std::int64_t>((rng_seed + i) & 0x7fffffffffffffffULL);
    corpora[i] = text::truncate_words(complete(backend, request), kMaxCorpusWords);
  });

  PoisonSet set;
  set.claim_id = plan.claim_id;
  set.attack_name = std::move(attack_name);
  set.rng_seed = rng_seed;
  set.budget_requested = plan.total_budget_requested;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto [k, h, query] = jobs[i];
    set.evidences.emplace_back(malicious_evidence_id(plan.claim_id, set.attack_name, k, h),
                               *query + " " + corpora[i],
                               Provenance::malicious(set.attack_name, k));
  }
  set.plan = plan;
  return set;
}

std::string fact2fiction_name(const Fact2FictionOptions& options) {
  std::string name = "fact2fiction";
  if (!options.answer_planning) name += "-no-answer-planning";
  if (!options.budget_planning) name += "-no-budget-planning";
  if (!options.query_planning) name += "-no-query-planning";
  return name;
}

}  // namespace factgauntlet
