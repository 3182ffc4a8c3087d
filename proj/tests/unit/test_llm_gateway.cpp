#include <doctest.h>

#include <atomic>
#include <functional>
#include <thread>

#include <httplib.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "factgauntlet/error.hpp"
#include "factgauntlet/live_embedder.hpp"
#include "factgauntlet/llm.hpp"
#include "factgauntlet/openai_backend.hpp"
#include "factgauntlet/payload.hpp"
#include "factgauntlet/perplexity.hpp"
#include "factgauntlet/prompts.hpp"
#include "test_support.hpp"

using namespace factgauntlet;

namespace {

/// Local OpenAI-compatible stub. Handlers see the parsed request body.
class StubServer {
 public:
  using Handler = std::function<void(const nlohmann::json&, httplib::Response&)>;

  StubServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  void on(const std::string& path, Handler h) {
    server_.Post(path, [this, h](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      last_auth_ = req.get_header_value("Authorization");
      h(nlohmann::json::parse(req.body), res);
    });
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int hits() const { return hits_.load(); }
  std::string last_auth() const { return last_auth_; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> hits_{0};
  std::string last_auth_;
};

HttpEndpointConfig fast_endpoint(const std::string& url, int retries = 3) {
  HttpEndpointConfig c;
  c.base_url = url;
  c.timeout = std::chrono::seconds(5);
  c.retry.max_retries = retries;
  c.retry.initial_backoff = std::chrono::milliseconds(1);
  c.retry.max_backoff = std::chrono::milliseconds(2);
  return c;
}

nlohmann::json chat_reply(const std::string& content) {
  return {{"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}}}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Prompt templates

TEST_CASE("decompose prompt renders claim and question count") {
  const auto p = render_prompt(TemplateId::Decompose, {{"CLAIM", "X"}, {"N_QUESTIONS", "10"}});
  CHECK(p.find("Claim: X") != std::string::npos);
  CHECK(p.find("10 Questions") != std::string::npos);
  CHECK(p.find("You are a fact-checker.") != std::string::npos);
  CHECK(p.find("[CLAIM]") == std::string::npos);
}

TEST_CASE("executor keyword follows the target verdict") {
  const Bindings base{{"CLAIM", "c"}, {"QUESTION", "q"}, {"ADVERSARIAL_ANSWER", "a"}};
  auto sup = base;
  sup["KEYWORD"] = std::string(executor_keyword(VeracityLabel::Supported));
  auto ref = base;
  ref["KEYWORD"] = std::string(executor_keyword(VeracityLabel::Refuted));
  const auto ps = render_prompt(TemplateId::ExecutorCorpus, sup);
  const auto pr = render_prompt(TemplateId::ExecutorCorpus, ref);
  CHECK(ps.find("Corpus that supports the claim (Max 30 words):") != std::string::npos);
  CHECK(pr.find("Corpus that refutes the claim (Max 30 words):") != std::string::npos);
  CHECK(answer_plan_keyword(VeracityLabel::Supported).starts_with("supports"));
  CHECK(answer_plan_keyword(VeracityLabel::Refuted).starts_with("refutes"));
}

TEST_CASE("missing slots are reported by name") {
  try {
    render_prompt(TemplateId::Decompose, {{"N_QUESTIONS", "3"}});
    FAIL("expected MissingSlotsError");
  } catch (const MissingSlotsError& e) {
    CHECK(e.missing() == std::vector<std::string>{"CLAIM"});
    CHECK(std::string(e.what()).find("CLAIM") != std::string::npos);
  }
}

TEST_CASE("appendix templates carry their signature phrases") {
  CHECK(template_body(TemplateId::AnswerPlan).find(
            "manipulate the answers so that they collectively influence") != std::string::npos);
  CHECK(template_body(TemplateId::ImportanceScore).find("importance score of the current question") !=
        std::string::npos);
  CHECK(template_body(TemplateId::QueryPlan).find("propose one or multiple search queries") !=
        std::string::npos);
  CHECK(template_body(TemplateId::ExecutorCorpus).find("Corpus that [KEYWORD] the claim (Max 30 words)") !=
        std::string::npos);
  CHECK(required_slots(TemplateId::QueryPlan) == std::set<std::string>{"CLAIM", "QUESTION"});
  for (auto id : {TemplateId::SimpleVerdict, TemplateId::Aggregate})
    CHECK(template_body(id).find("VERDICT: <verdict>") != std::string::npos);
  CHECK(required_slots(TemplateId::AnswerPlanUntargeted).count("JUSTIFICATION") == 0);
}

TEST_CASE("rendering is single pass and injective in the claim") {
  const auto a = render_prompt(TemplateId::Paraphrase, {{"CLAIM", "[CLAIM] one"}});
  CHECK(a.find("Claim: [CLAIM] one") != std::string::npos);
  const auto b = render_prompt(TemplateId::Paraphrase, {{"CLAIM", "two"}});
  CHECK(a != b);
}

// ---------------------------------------------------------------------------
// Scripted backend

TEST_CASE("scripted backend: first matching rule wins, default otherwise") {
  const ScriptedBackend b({fgtest::rule({"Interpretation"}, "1. Q?"),
                           fgtest::rule({"Interpretation", "X"}, "never")},
                          "fallback");
  const auto decompose = render_prompt(TemplateId::Decompose, {{"CLAIM", "X"}, {"N_QUESTIONS", "2"}});
  CHECK(complete(b, decompose) == "1. Q?");
  CHECK(complete(b, "something else") == "fallback");
  CHECK(b.match("something else") == std::nullopt);
  CHECK(b.match(decompose) == 0u);
}

TEST_CASE("scripted backend from json, pattern rules and errors") {
  const auto b = ScriptedBackend::from_json(nlohmann::json::parse(R"({
    "rules": [
      {"contains": "alpha", "response": "A"},
      {"contains": ["beta", "gamma"], "response": "BG"},
      {"pattern": "num[0-9]+", "response": "N"}
    ],
    "default": "D"})"));
  CHECK(b.rule_count() == 3);
  CHECK(complete(b, "xx alpha") == "A");
  CHECK(complete(b, "beta only") == "D");
  CHECK(complete(b, "gamma and beta") == "BG");
  CHECK(complete(b, "see num42") == "N");

  CHECK_THROWS(ScriptedBackend::from_json(nlohmann::json::parse(R"({"rules": [{"response": "x"}]})")));
  CHECK_THROWS(ScriptedBackend::from_file("/nonexistent/rules.json"));
}

TEST_CASE("complete validates the request and rejects empty output") {
  const ScriptedBackend empty({}, "   ");
  CHECK_THROWS_AS(complete(empty, "hi"), EmptyResponseError);
  CHECK_THROWS_AS(complete(empty, ""), ValidationError);
  CompletionRequest r;
  r.prompt = "p";
  r.temperature = -1;
  CHECK_THROWS_AS(complete(ScriptedBackend({}, "x"), r), ValidationError);
  CHECK(CompletionRequest{}.temperature == 1.0);
}

TEST_CASE("tracing backend records exchanges") {
  const ScriptedBackend inner({}, "ok");
  const TracingBackend tracer(inner);
  complete(tracer, "first");
  complete(tracer, "second");
  const auto log = tracer.exchanges();
  REQUIRE(log.size() == 2);
  CHECK(log[0].prompt == "first");
  CHECK(log[1].completion == "ok");
}

// ---------------------------------------------------------------------------
// Structured payload parsing

TEST_CASE("importance payloads") {
  const auto plain = parse_importance(R"({"importance_score": 7, "reasoning": "r"})");
  CHECK(plain.importance_score == 7.0);
  CHECK(plain.reasoning == "r");
  CHECK_FALSE(plain.clamped);

  const auto fenced = parse_importance("Sure.\n```json\n{\"importance_score\": 7, \"reasoning\": \"r\"}\n```\n");
  CHECK(fenced.importance_score == 7.0);
  CHECK(fenced.reasoning == "r");

  const auto high = parse_importance(R"({"importance_score": 14, "reasoning": "x"})");
  CHECK(high.importance_score == 10.0);
  CHECK(high.clamped);
  const auto low = parse_importance(R"({"importance_score": -2, "reasoning": "x"})");
  CHECK(low.importance_score == 0.0);
  CHECK(low.clamped);

  const auto as_variant =
      parse_json_payload(R"({"importance_score": 3, "reasoning": ""})", SchemaId::ImportanceResponse);
  CHECK(std::get<ImportanceResponse>(as_variant).importance_score == 3.0);

  CHECK_THROWS_AS(parse_importance("no json here"), ParseError);
  try {
    parse_importance(R"({"reasoning": "missing score"})");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.raw().find("missing score") != std::string::npos);
  }
}

TEST_CASE("answer plan payloads") {
  const auto plan = parse_answer_plan(
      "Here you go: {\"answers\": [{\"question\": \"q1\", \"answer\": \"a1\", \"reason\": \"r1\"},"
      " {\"question\": \"q2\", \"answer\": \"a2\", \"reason\": \"r2\"}]} thanks");
  REQUIRE(plan.answers.size() == 2);
  CHECK(plan.answers[1].answer == "a2");
  CHECK(plan.answers[0].reason == "r1");
  CHECK_THROWS_AS(parse_answer_plan(R"({"answers": [{"question": "q"}]})"), ParseError);
  CHECK_THROWS_AS(parse_answer_plan(R"({"answers": 3})"), ParseError);
}

TEST_CASE("back-ticked query extraction") {
  CHECK(extract_backticked("Final: `one` and `two`") == std::vector<std::string>{"one", "two"});
  CHECK(extract_backticked("`a` `b` `c` `d` `e` `f` `g`") ==
        std::vector<std::string>{"a", "b", "c", "d", "e"});
  CHECK(extract_backticked("no ticks").empty());
  CHECK(extract_backticked("`x` `x` `y`") == std::vector<std::string>{"x", "y"});
}

TEST_CASE("enumerated question extraction") {
  const std::string reply =
      "Interpretation: blah\n1. A subclaim\n2. Another subclaim\n\n"
      "Questions:\n1. First question?\n2. Second question?\n3) Third question?\n";
  CHECK(extract_enumerated_questions(reply) ==
        std::vector<std::string>{"First question?", "Second question?", "Third question?"});

  std::string many = "Questions:\n";
  for (int i = 1; i <= 12; ++i) many += std::to_string(i) + ". Q" + std::to_string(i) + "?\n";
  CHECK(extract_enumerated_questions(many).size() == 10);
  CHECK(extract_enumerated_questions(many, 3).size() == 3);
  CHECK(extract_enumerated_questions("nothing enumerated").empty());
}

// ---------------------------------------------------------------------------
// Live client against a local stub

TEST_CASE("chat backend wire format round trip") {
  StubServer stub;
  nlohmann::json seen;
  stub.on("/v1/chat/completions", [&](const nlohmann::json& body, httplib::Response& res) {
    seen = body;
    res.set_content(chat_reply("VERDICT: Supported").dump(), "application/json");
  });
  auto endpoint = fast_endpoint(stub.url() + "/v1");
  endpoint.api_key = "test-key";
  const OpenAiChatBackend backend(endpoint, "model-x");
  CompletionRequest req;
  req.prompt = "hello";
  req.seed = 42;
  CHECK(complete(backend, req) == "VERDICT: Supported");
  CHECK(seen["model"] == "model-x");
  CHECK(seen["messages"].size() == 1);
  CHECK(seen["messages"][0]["role"] == "user");
  CHECK(seen["messages"][0]["content"] == "hello");
  CHECK(seen["temperature"] == 1.0);
  CHECK(seen["seed"] == 42);
  CHECK(stub.last_auth() == "Bearer test-key");
}

TEST_CASE("chat backend retries retriable failures a bounded number of times") {
  StubServer stub;
  std::atomic<int> calls{0};
  stub.on("/v1/chat/completions", [&](const nlohmann::json&, httplib::Response& res) {
    if (++calls <= 2) {
      res.status = 503;
      return;
    }
    res.set_content(chat_reply("ok").dump(), "application/json");
  });
  const OpenAiChatBackend backend(fast_endpoint(stub.url()), "m");
  CHECK(complete(backend, "p") == "ok");
  CHECK(backend.client().attempts() == 3);
}

TEST_CASE("chat backend gives up after max retries") {
  StubServer stub;
  stub.on("/v1/chat/completions", [&](const nlohmann::json&, httplib::Response& res) {
    res.status = 429;
  });
  const OpenAiChatBackend backend(fast_endpoint(stub.url(), 2), "m");
  CHECK_THROWS_AS(complete(backend, "p"), RateLimitError);
  CHECK(backend.client().attempts() == 3);
}

TEST_CASE("non-retriable failures are not retried") {
  StubServer stub;
  stub.on("/v1/chat/completions", [&](const nlohmann::json&, httplib::Response& res) {
    res.set_content("not json at all", "text/plain");
  });
  const OpenAiChatBackend backend(fast_endpoint(stub.url()), "m");
  CHECK_THROWS_AS(complete(backend, "p"), MalformedReplyError);
  CHECK(backend.client().attempts() == 1);

  StubServer bad_request;
  bad_request.on("/v1/chat/completions", [&](const nlohmann::json&, httplib::Response& res) {
    res.status = 400;
  });
  const OpenAiChatBackend b2(fast_endpoint(bad_request.url()), "m");
  try {
    complete(b2, "p");
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK_FALSE(e.retriable());
    CHECK(e.status() == 400);
  }
  CHECK(b2.client().attempts() == 1);
}

TEST_CASE("empty and malformed chat replies") {
  CHECK_THROWS_AS(OpenAiChatBackend::extract_content(nlohmann::json::object()), MalformedReplyError);
  CHECK_THROWS_AS(OpenAiChatBackend::extract_content({{"choices", nlohmann::json::array()}}),
                  MalformedReplyError);
  CHECK(OpenAiChatBackend::extract_content(chat_reply("x")) == "x");

  StubServer stub;
  stub.on("/v1/chat/completions", [&](const nlohmann::json&, httplib::Response& res) {
    res.set_content(chat_reply("").dump(), "application/json");
  });
  const OpenAiChatBackend backend(fast_endpoint(stub.url()), "m");
  CHECK_THROWS_AS(complete(backend, "p"), EmptyResponseError);
}

TEST_CASE("connection failures surface as retriable transport errors") {
  // Bind an ephemeral port and close it again so nothing is listening there.
  int port = 0;
  {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(fd >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    socklen_t len = sizeof addr;
    REQUIRE(::bind(fd, reinterpret_cast<sockaddr*>(&addr), len) == 0);
    REQUIRE(::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0);
    port = ntohs(addr.sin_port);
    ::close(fd);
  }
  const OpenAiChatBackend backend(fast_endpoint("http://127.0.0.1:" + std::to_string(port), 1), "m");
  try {
    complete(backend, "p");
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    CHECK(e.retriable());
  }
  CHECK(backend.client().attempts() == 2);
}

TEST_CASE("embeddings wire format") {
  StubServer stub;
  nlohmann::json seen;
  stub.on("/v1/embeddings", [&](const nlohmann::json& body, httplib::Response& res) {
    seen = body;
    nlohmann::json data = nlohmann::json::array();
    // Reply out of order to exercise index handling.
    for (int i = static_cast<int>(body["input"].size()) - 1; i >= 0; --i)
      data.push_back({{"index", i}, {"embedding", {static_cast<double>(i), 1.0}}});
    res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
  });
  const OpenAiEmbedder emb(fast_endpoint(stub.url()), "embed-m", 2, 2);
  const std::vector<std::string> texts{"a", "b", "c"};
  const auto out = emb.embed_batch(texts);
  REQUIRE(out.size() == 3);
  CHECK(out[0][0] == 0.0);
  CHECK(out[1][0] == 1.0);
  CHECK(out[2][0] == 0.0);  // second batch starts again at index 0
  CHECK(seen["model"] == "embed-m");
  CHECK(seen["input"] == nlohmann::json::array({"c"}));
  CHECK(stub.hits() == 2);

  const OpenAiEmbedder wrong_dim(fast_endpoint(stub.url()), "embed-m", 3);
  CHECK_THROWS_AS(wrong_dim.embed("a"), MalformedReplyError);
}

TEST_CASE("embedding endpoint transport failure is retriable") {
  StubServer stub;
  stub.on("/v1/embeddings", [&](const nlohmann::json&, httplib::Response& res) { res.status = 502; });
  const OpenAiEmbedder emb(fast_endpoint(stub.url(), 1), "m", 2);
  try {
    emb.embed("x");
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    CHECK(e.retriable());
    CHECK(e.status() == 502);
  }
  CHECK(stub.hits() == 2);
}

TEST_CASE("remote logprob perplexity scorer") {
  StubServer stub;
  nlohmann::json seen;
  stub.on("/v1/completions", [&](const nlohmann::json& body, httplib::Response& res) {
    seen = body;
    nlohmann::json reply{
        {"choices",
         {{{"logprobs", {{"token_logprobs", {nullptr, -1.0, -3.0}}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  const RemoteLogprobScorer scorer(fast_endpoint(stub.url()), "lm");
  CHECK(scorer.score("some text") == doctest::Approx(std::exp(2.0)));
  CHECK(seen["echo"] == true);
  CHECK(seen["max_tokens"] == 0);
  CHECK(seen["prompt"] == "some text");
  CHECK_THROWS_AS(RemoteLogprobScorer::perplexity_from_reply(nlohmann::json::object()),
                  MalformedReplyError);
}

TEST_CASE("retry backoff grows and is capped") {
  RetryPolicy p;
  p.initial_backoff = std::chrono::milliseconds(100);
  p.backoff_factor = 2.0;
  p.max_backoff = std::chrono::milliseconds(300);
  CHECK(p.delay_for(1).count() == 100);
  CHECK(p.delay_for(2).count() == 200);
  CHECK(p.delay_for(3).count() == 300);
}
