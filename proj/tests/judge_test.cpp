#include <doctest.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "llmrank/errors.hpp"
#include "llmrank/judge.hpp"
#include "llmrank/util.hpp"

using namespace llmrank;
using json = nlohmann::json;

namespace {

int count_occurrences(const std::string& haystack, const std::string& needle) {
  int count = 0;
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

std::vector<DocumentRecord> make_docs(int n) {
  std::vector<DocumentRecord> docs;
  for (int i = 0; i < n; ++i)
    docs.push_back({"doc" + std::to_string(i), "Title " + std::to_string(i),
                    "body text " + std::to_string(i)});
  return docs;
}

std::vector<const DocumentRecord*> doc_ptrs(const std::vector<DocumentRecord>& docs) {
  std::vector<const DocumentRecord*> ptrs;
  for (const auto& d : docs) ptrs.push_back(&d);
  return ptrs;
}

bool is_permutation_response(const JudgeResponse& r, int n) {
  if (static_cast<int>(r.ranking.size()) != n) return false;
  std::vector<bool> alias_seen(static_cast<std::size_t>(n) + 1, false);
  for (int i = 0; i < n; ++i) {
    const RankedDoc& rd = r.ranking[static_cast<std::size_t>(i)];
    if (rd.rank != i + 1) return false;
    if (rd.alias < 1 || rd.alias > n) return false;
    if (alias_seen[static_cast<std::size_t>(rd.alias)]) return false;
    alias_seen[static_cast<std::size_t>(rd.alias)] = true;
  }
  return true;
}

// Backend that fails a configurable number of times before succeeding.
class FlakyBackend : public JudgeBackend {
 public:
  FlakyBackend(int failures, std::string payload)
      : failures_(failures), payload_(std::move(payload)) {}
  std::string kind() const override { return "scripted"; }
  std::string model() const override { return "flaky"; }

 private:
  std::string do_complete(const JudgeRequest&) override {
    if (seen_.fetch_add(1) < failures_)
      throw TransportError(TransportError::Kind::network, "flaky");
    return payload_;
  }
  int failures_;
  std::string payload_;
  std::atomic<int> seen_{0};
};

}  // namespace

TEST_CASE("builtin scales") {
  CHECK(RelevanceScale::builtin(11).max_points() == 10);
  CHECK(RelevanceScale::builtin(2).max_points() == 1);
  CHECK(RelevanceScale::builtin(7).rubric().size() == 7);
  CHECK_THROWS_AS(RelevanceScale::builtin(4), ConfigError);
  CHECK_THROWS_AS(RelevanceScale(2, {{2, "a"}, {1, "b"}}), ConfigError);       // missing 0
  CHECK_THROWS_AS(RelevanceScale(1, {{0, "a"}, {1, "b"}}), ConfigError);       // ascending
  CHECK_THROWS_AS(RelevanceScale(1, {{1, ""}, {0, "b"}}), ConfigError);        // empty text
}

TEST_CASE("pointwise prompt rendering") {
  Query q{"q1", "capital of France"};
  DocumentRecord d{"d1", std::nullopt, "Paris has been the French seat of government for centuries."};
  std::string prompt = render_pointwise_prompt(q, d, RelevanceScale::builtin(11));
  CHECK(prompt.find("0-10 scale") != std::string::npos);
  for (const auto& [label, text] : RelevanceScale::builtin(11).rubric())
    CHECK(prompt.find(std::to_string(label) + ": " + text) != std::string::npos);
  CHECK(count_occurrences(prompt, "capital of France") == 2);
  CHECK(prompt.find("Paris has been the French seat") != std::string::npos);
  CHECK(prompt.find("{user_query}") == std::string::npos);
  CHECK(prompt.find("\"score\": integer in the range 0-10") != std::string::npos);

  std::string two = render_pointwise_prompt(q, d, RelevanceScale::builtin(2));
  CHECK(two.find("1: Relevant - The document addresses the user's query well") != std::string::npos);
  CHECK(two.find("0: Not relevant - The document does not address the user's query") !=
        std::string::npos);
  CHECK(two.find("0-1 scale") != std::string::npos);
}

TEST_CASE("pointwise prompt title toggle") {
  Query q{"q1", "anything"};
  DocumentRecord d{"d1", "A Title", "the body"};
  std::string with_title = render_pointwise_prompt(q, d, RelevanceScale::builtin(11), true);
  CHECK(with_title.find("A Title\nthe body") != std::string::npos);
  std::string without = render_pointwise_prompt(q, d, RelevanceScale::builtin(11), false);
  CHECK(without.find("A Title") == std::string::npos);
}

TEST_CASE("listwise prompt rendering") {
  Query q{"q1", "some query"};
  auto docs = make_docs(20);
  auto ptrs = doc_ptrs(docs);

  auto [rank_prompt, aliases] = render_listwise_prompt(q, ptrs, JudgeMode::rank_only, nullptr);
  CHECK(rank_prompt.find("the document ranks should end at 20") != std::string::npos);
  CHECK(rank_prompt.find("\"score\"") == std::string::npos);
  CHECK(aliases.size() == 20);
  CHECK(aliases.alias_of("doc0") == 1);
  CHECK(aliases.alias_of("doc19") == 20);
  CHECK(rank_prompt.find("<document document_id=\"1\">\n<title>Title 0</title>\n<content>body text 0</content>\n</document>") != std::string::npos);

  const RelevanceScale& eleven = RelevanceScale::builtin(11);
  auto [rs_prompt, rs_aliases] =
      render_listwise_prompt(q, ptrs, JudgeMode::rank_and_score, &eleven);
  CHECK(rs_prompt.find("\"rank\": 1, \"score\": 8") != std::string::npos);
  CHECK(rs_prompt.find("\"rank\": 2, \"score\": 6") != std::string::npos);
  CHECK(rs_prompt.find("10: Perfect match") != std::string::npos);
  CHECK(rs_prompt.find("the document ranks should end at 20") != std::string::npos);

  // smaller scales clamp the example scores into range
  const RelevanceScale& two = RelevanceScale::builtin(2);
  auto [small_prompt, small_aliases] =
      render_listwise_prompt(q, ptrs, JudgeMode::rank_and_score, &two);
  CHECK(small_prompt.find("\"score\": 8") == std::string::npos);
  CHECK(small_prompt.find("\"rank\": 1, \"score\": 1") != std::string::npos);

  CHECK_THROWS_AS(render_listwise_prompt(q, ptrs, JudgeMode::pointwise, nullptr), ConfigError);
  CHECK_THROWS_AS(render_listwise_prompt(q, ptrs, JudgeMode::rank_and_score, nullptr), ConfigError);
}

TEST_CASE("alias map is a bijection") {
  auto docs = make_docs(7);
  auto [prompt, aliases] = render_listwise_prompt(Query{"q", "x"}, doc_ptrs(docs),
                                                  JudgeMode::rank_only, nullptr);
  for (int a = 1; a <= aliases.size(); ++a) CHECK(aliases.alias_of(aliases.doc_of(a)) == a);
  for (const auto& d : docs) CHECK(aliases.doc_of(aliases.alias_of(d.doc_id)) == d.doc_id);
  CHECK(aliases.alias_of("nope") == 0);
  CHECK_THROWS_AS(aliases.doc_of(8), std::out_of_range);
}

TEST_CASE("parse_pointwise_response") {
  const RelevanceScale& scale = RelevanceScale::builtin(11);
  CHECK(parse_pointwise_response("{\"score\": 7}", scale) == 7);
  CHECK(parse_pointwise_response("```json\n{\"score\": 3}\n```", scale) == 3);
  CHECK(parse_pointwise_response("Sure! Here is my answer: {\"score\": 0} hope it helps", scale) == 0);
  CHECK_THROWS_AS(parse_pointwise_response("{\"score\": 12}", scale), SchemaError);
  CHECK_THROWS_AS(parse_pointwise_response("{\"score\": -1}", scale), SchemaError);
  CHECK_THROWS_AS(parse_pointwise_response("{\"score\": 7.5}", scale), SchemaError);
  CHECK_THROWS_AS(parse_pointwise_response("{\"score\": \"7\"}", scale), SchemaError);
  CHECK_THROWS_AS(parse_pointwise_response("{\"grade\": 7}", scale), SchemaError);
  CHECK_THROWS_AS(parse_pointwise_response("no json here", scale), SchemaError);
  CHECK_THROWS_AS(parse_pointwise_response("", scale), SchemaError);
}

TEST_CASE("parse_listwise_response keeps valid permutations") {
  const RelevanceScale& scale = RelevanceScale::builtin(11);
  auto docs = make_docs(20);
  auto [prompt, aliases] = render_listwise_prompt(Query{"q", "x"}, doc_ptrs(docs),
                                                  JudgeMode::rank_and_score, &scale);
  json items = json::array();
  for (int i = 0; i < 20; ++i)
    items.push_back({{"document_id", 20 - i}, {"rank", i + 1}, {"score", (i * 3) % 11}});
  json reply = {{"ranked_documents", items}};
  JudgeResponse r =
      parse_listwise_response(reply.dump(), aliases, 20, JudgeMode::rank_and_score, &scale);
  REQUIRE(is_permutation_response(r, 20));
  for (int i = 0; i < 20; ++i) {
    CHECK(r.ranking[static_cast<std::size_t>(i)].alias == 20 - i);
    CHECK(r.ranking[static_cast<std::size_t>(i)].score == (i * 3) % 11);
  }
}

TEST_CASE("parse_listwise_response repairs damage") {
  const RelevanceScale& scale = RelevanceScale::builtin(11);
  AliasMap aliases({"a", "b", "c", "d"});

  SUBCASE("missing alias gets rank n and score 0") {
    // alias 3 absent from a batch of 4
    std::string reply = R"({"ranked_documents": [
        {"document_id": 2, "rank": 1, "score": 9},
        {"document_id": 1, "rank": 2, "score": 5},
        {"document_id": 4, "rank": 3, "score": 2}]})";
    JudgeResponse r = parse_listwise_response(reply, aliases, 4, JudgeMode::rank_and_score, &scale);
    REQUIRE(is_permutation_response(r, 4));
    CHECK(r.ranking[3].alias == 3);
    CHECK(r.ranking[3].rank == 4);
    CHECK(r.ranking[3].score == 0);
  }

  SUBCASE("duplicate alias keeps the first occurrence") {
    std::string reply = R"({"ranked_documents": [
        {"document_id": 3, "rank": 1, "score": 9},
        {"document_id": 3, "rank": 5, "score": 1},
        {"document_id": 1, "rank": 2, "score": 4}]})";
    JudgeResponse r = parse_listwise_response(reply, aliases, 4, JudgeMode::rank_and_score, &scale);
    REQUIRE(is_permutation_response(r, 4));
    CHECK(r.ranking[0].alias == 3);
    CHECK(r.ranking[0].score == 9);
  }

  SUBCASE("unknown aliases dropped, string ids accepted") {
    std::string reply = R"(prose before ```json
        {"ranked_documents": [
          {"document_id": "2", "rank": 1},
          {"document_id": 99, "rank": 2},
          {"document_id": "4", "rank": 3}]}
        ``` prose after)";
    JudgeResponse r = parse_listwise_response(reply, aliases, 4, JudgeMode::rank_only, nullptr);
    REQUIRE(is_permutation_response(r, 4));
    CHECK(r.ranking[0].alias == 2);
    CHECK(r.ranking[1].alias == 4);
  }

  SUBCASE("scores clamp to the scale range") {
    std::string reply = R"({"ranked_documents": [
        {"document_id": 1, "rank": 1, "score": 99},
        {"document_id": 2, "rank": 2, "score": -3},
        {"document_id": 3, "rank": 3, "score": 4},
        {"document_id": 4, "rank": 4}]})";
    JudgeResponse r = parse_listwise_response(reply, aliases, 4, JudgeMode::rank_and_score, &scale);
    CHECK(r.ranking[0].score == 10);
    CHECK(r.ranking[1].score == 0);
    CHECK(r.ranking[2].score == 4);
    CHECK(r.ranking[3].score == 0);
  }

  SUBCASE("bare top-level array accepted") {
    std::string reply = R"([{"document_id": 4, "rank": 1}, {"document_id": 1, "rank": 2}])";
    JudgeResponse r = parse_listwise_response(reply, aliases, 4, JudgeMode::rank_only, nullptr);
    REQUIRE(is_permutation_response(r, 4));
    CHECK(r.ranking[0].alias == 4);
  }

  SUBCASE("no JSON at all raises a schema error") {
    CHECK_THROWS_AS(
        parse_listwise_response("total garbage", aliases, 4, JudgeMode::rank_only, nullptr),
        SchemaError);
  }
}

TEST_CASE("parse_listwise_response always yields a permutation") {
  const RelevanceScale& scale = RelevanceScale::builtin(11);
  Rng rng(606);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 2 + static_cast<int>(rng.next_below(20));
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back("d" + std::to_string(i));
    AliasMap aliases(ids);

    json items = json::array();
    int entries = static_cast<int>(rng.next_below(static_cast<uint64_t>(n) + 5));
    for (int e = 0; e < entries; ++e) {
      json item;
      // aliases may be valid, out of range, duplicated or missing entirely
      switch (rng.next_below(4)) {
        case 0: item["document_id"] = 1 + static_cast<int>(rng.next_below(static_cast<uint64_t>(n))); break;
        case 1: item["document_id"] = static_cast<int>(rng.next_below(60)) - 20; break;
        case 2: item["document_id"] = std::to_string(1 + rng.next_below(static_cast<uint64_t>(n))); break;
        default: break;
      }
      if (rng.next_below(5)) item["rank"] = static_cast<int>(rng.next_below(50)) - 10;
      if (rng.next_below(2)) item["score"] = static_cast<int>(rng.next_below(40)) - 10;
      items.push_back(item);
    }
    json reply = {{"ranked_documents", items}};
    std::string text = rng.next_below(2) ? reply.dump() : "noise ```json\n" + reply.dump() + "\n```";
    JudgeResponse r = parse_listwise_response(text, aliases, n, JudgeMode::rank_and_score, &scale);
    CHECK(is_permutation_response(r, n));
    for (const auto& rd : r.ranking) {
      CHECK(rd.score >= 0);
      CHECK(rd.score <= 10);
    }
  }
}

TEST_CASE("judge_call retry and fallback policy") {
  RetryPolicy fast{3, std::chrono::milliseconds(0)};

  SUBCASE("success on the second attempt") {
    FlakyBackend backend(1, "{\"score\": 4}");
    JudgeRequest req;
    req.mode = JudgeMode::pointwise;
    req.scale_max = 10;
    JudgeResponse r = judge_call(req, backend, fast);
    CHECK(r.score == 4);
    CHECK(r.attempts == 2);
    CHECK_FALSE(r.fallback);
    CHECK(backend.call_count() == 2);
  }

  SUBCASE("pointwise exhaustion falls back to score 0") {
    ScriptedBackend backend({}, true);
    JudgeRequest req;
    req.mode = JudgeMode::pointwise;
    req.scale_max = 10;
    JudgeResponse r = judge_call(req, backend, fast);
    CHECK(r.score == 0);
    CHECK(r.fallback);
    CHECK(r.attempts == 3);
    CHECK(backend.call_count() == 3);  // never more than max_attempts
  }

  SUBCASE("listwise exhaustion assigns rank n and score 0 to every document") {
    ScriptedBackend backend({}, true);
    JudgeRequest req;
    req.mode = JudgeMode::rank_and_score;
    req.scale_max = 10;
    req.aliases = AliasMap({"a", "b", "c"});
    JudgeResponse r = judge_call(req, backend, fast);
    CHECK(r.fallback);
    REQUIRE(r.ranking.size() == 3);
    for (const auto& rd : r.ranking) {
      CHECK(rd.rank == 3);
      CHECK(rd.score == 0);
    }
    CHECK(backend.call_count() == 3);
  }

  SUBCASE("schema failures consume attempts too") {
    ScriptedBackend backend({"not json", "also not json", "{\"score\": 9}"});
    JudgeRequest req;
    req.mode = JudgeMode::pointwise;
    req.scale_max = 10;
    JudgeResponse r = judge_call(req, backend, fast);
    CHECK(r.score == 9);
    CHECK(r.attempts == 3);
  }
}

TEST_CASE("oracle_judge") {
  Qrels qrels = parse_qrels("q1 0 d1 3\nq1 0 d2 1\nq1 0 d3 0");

  SUBCASE("noiseless listwise sorts by grade then doc id") {
    auto r = oracle_judge("q1", {"d3", "d1", "d2"}, qrels, 10, JudgeMode::rank_and_score, 0.0, 1);
    REQUIRE(r.ranking.size() == 3);
    CHECK(r.ranking[0].alias == 2);  // d1
    CHECK(r.ranking[1].alias == 3);  // d2
    CHECK(r.ranking[2].alias == 1);  // d3
    CHECK(r.ranking[0].score == 10);
    CHECK(r.ranking[1].score == 3);  // round(1 * 10 / 3)
    CHECK(r.ranking[2].score == 0);
  }

  SUBCASE("pointwise rescale endpoints and monotonicity") {
    auto top = oracle_judge("q1", {"d1"}, qrels, 10, JudgeMode::pointwise, 0.0, 1);
    CHECK(top.score == 10);
    auto mid = oracle_judge("q1", {"d2"}, qrels, 10, JudgeMode::pointwise, 0.0, 1);
    auto bottom = oracle_judge("q1", {"d3"}, qrels, 10, JudgeMode::pointwise, 0.0, 1);
    CHECK(bottom.score == 0);
    CHECK(top.score > mid.score);
    CHECK(mid.score > bottom.score);
  }

  SUBCASE("noise 1 on two documents always swaps") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
      auto r = oracle_judge("q1", {"d1", "d3"}, qrels, 10, JudgeMode::rank_only, 1.0, seed);
      CHECK(r.ranking[0].alias == 2);  // d3 swapped above d1
      CHECK(r.ranking[1].alias == 1);
    }
  }

  SUBCASE("noise 0 is deterministic across seeds") {
    auto a = oracle_judge("q1", {"d1", "d2", "d3"}, qrels, 10, JudgeMode::rank_and_score, 0.0, 1);
    auto b = oracle_judge("q1", {"d1", "d2", "d3"}, qrels, 10, JudgeMode::rank_and_score, 0.0, 999);
    REQUIRE(a.ranking.size() == b.ranking.size());
    for (std::size_t i = 0; i < a.ranking.size(); ++i) {
      CHECK(a.ranking[i].alias == b.ranking[i].alias);
      CHECK(a.ranking[i].score == b.ranking[i].score);
    }
  }

  SUBCASE("rank_only mode zeroes the scores") {
    auto r = oracle_judge("q1", {"d1", "d2"}, qrels, 10, JudgeMode::rank_only, 0.0, 1);
    for (const auto& rd : r.ranking) CHECK(rd.score == 0);
  }
}

TEST_CASE("oracle backend is order independent") {
  auto qrels = std::make_shared<Qrels>(parse_qrels("q1 0 d1 3\nq1 0 d2 1\nq2 0 d1 2"));
  OracleBackend backend(qrels, 0.5, 42);
  JudgeRequest req;
  req.mode = JudgeMode::rank_and_score;
  req.scale_max = 10;
  req.query_id = "q1";
  req.doc_ids = {"d1", "d2"};
  req.aliases = AliasMap(req.doc_ids);
  std::string first = backend.complete(req);
  JudgeRequest other;
  other.mode = JudgeMode::rank_and_score;
  other.scale_max = 10;
  other.query_id = "q2";
  other.doc_ids = {"d1"};
  other.aliases = AliasMap(other.doc_ids);
  backend.complete(other);
  CHECK(backend.complete(req) == first);  // unaffected by interleaved calls
}

TEST_CASE("response cache stores only parsed replies") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "llmrank_cache_test";
  fs::remove_all(dir);
  auto cache = std::make_shared<ResponseCache>(dir.string());
  RetryPolicy fast{3, std::chrono::milliseconds(0)};

  // first call fails once, then succeeds; the good reply lands in the cache
  auto flaky = std::make_shared<FlakyBackend>(1, "{\"score\": 6}");
  JudgeClient client(flaky, fast, cache);
  JudgeRequest req;
  req.mode = JudgeMode::pointwise;
  req.scale_max = 10;
  req.system_prompt = "sys";
  req.user_prompt = "user";
  JudgeResponse first = client.call(req);
  CHECK(first.score == 6);
  CHECK(flaky->call_count() == 2);

  // a fresh failing backend never gets called once the cache is warm
  auto dead = std::make_shared<FlakyBackend>(1000, "unused");
  JudgeClient warm(dead, fast, cache);
  JudgeResponse second = warm.call(req);
  CHECK(second.score == 6);
  CHECK(second.attempts == 0);
  CHECK(dead->call_count() == 0);
  fs::remove_all(dir);
}

TEST_CASE("judge client instrumentation tracks calls and fallbacks") {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{}, true);
  auto instr = std::make_shared<JudgeInstrumentation>();
  JudgeClient client(backend, RetryPolicy{3, std::chrono::milliseconds(0)}, nullptr, instr);
  JudgeRequest req;
  req.mode = JudgeMode::pointwise;
  req.scale_max = 10;
  req.system_prompt = "two words";
  req.user_prompt = "three more words";
  client.call(req);
  client.call(req);
  CHECK(instr->calls.load() == 2);
  CHECK(instr->fallbacks.load() == 2);
  CHECK(instr->input_ws_tokens.load() == 10);
  CHECK(instr->in_flight.load() == 0);
  CHECK(instr->peak_in_flight.load() >= 1);
}

TEST_CASE("http judge against a local server") {
  httplib::Server server;
  server.Post("/v1/chat/completions", [](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body);
    REQUIRE(body["temperature"].get<double>() == 0.0);
    REQUIRE(body["messages"].size() == 2);
    REQUIRE(body["messages"][0]["role"] == "system");
    json reply = {{"choices", json::array({{{"message", {{"content", "{\"score\":5}"}}}}})}};
    res.set_content(reply.dump(), "application/json");
  });
  server.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("boom", "text/plain");
  });
  server.Post("/slow", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1500));
    res.set_content("{}", "application/json");
  });

  int port = server.bind_to_any_port("127.0.0.1");
  std::thread runner([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpJudgeConfig config;
  config.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  config.model = "test-model";
  config.timeout_ms = 3000;

  SUBCASE("passes the assistant text through") {
    CHECK(http_judge("sys", "user", config) == "{\"score\":5}");
  }

  SUBCASE("status errors carry the status kind") {
    HttpJudgeConfig broken = config;
    broken.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/broken";
    try {
      http_judge("sys", "user", broken);
      FAIL("expected TransportError");
    } catch (const TransportError& e) {
      CHECK(e.kind() == TransportError::Kind::status);
      CHECK(e.status_code() == 500);
    }
  }

  SUBCASE("timeouts are distinct from status errors") {
    HttpJudgeConfig slow = config;
    slow.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/slow";
    slow.timeout_ms = 200;
    try {
      http_judge("sys", "user", slow);
      FAIL("expected TransportError");
    } catch (const TransportError& e) {
      CHECK(e.kind() == TransportError::Kind::timeout);
      CHECK(e.kind() != TransportError::Kind::status);
    }
  }

  SUBCASE("connection refused is a network error") {
    HttpJudgeConfig refused = config;
    refused.endpoint = "http://127.0.0.1:1/nope";
    CHECK_THROWS_AS(http_judge("sys", "user", refused), TransportError);
  }

  SUBCASE("http backend runs through the judge client") {
    auto backend = std::make_shared<HttpBackend>(config);
    JudgeClient client(backend, RetryPolicy{3, std::chrono::milliseconds(0)});
    JudgeRequest req;
    req.mode = JudgeMode::pointwise;
    req.scale_max = 10;
    req.system_prompt = "sys";
    req.user_prompt = "user";
    JudgeResponse r = client.call(req);
    CHECK(r.score == 5);
    CHECK_FALSE(r.fallback);
  }

  server.stop();
  runner.join();
}
