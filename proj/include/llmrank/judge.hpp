#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "llmrank/corpus.hpp"

namespace llmrank {

enum class JudgeMode { pointwise, rank_only, rank_and_score };

// Ordinal relevance rubric: integer labels max_points..0 with one description
// per label, listed in descending order.
class RelevanceScale {
 public:
  RelevanceScale(int max_points, std::vector<std::pair<int, std::string>> rubric);

  // Built-in rubrics for 2, 3, 5, 7 and 11 point scales.
  static const RelevanceScale& builtin(int points);

  int max_points() const { return max_points_; }
  const std::vector<std::pair<int, std::string>>& rubric() const { return rubric_; }
  std::string rubric_text() const;  // "label: description" lines, descending

 private:
  int max_points_;
  std::vector<std::pair<int, std::string>> rubric_;
};

// Bijection between document ids and the integer aliases 1..n used in
// listwise prompts, assigned in input order.
class AliasMap {
 public:
  AliasMap() = default;
  explicit AliasMap(std::vector<std::string> doc_ids) : doc_ids_(std::move(doc_ids)) {}

  int size() const { return static_cast<int>(doc_ids_.size()); }
  int alias_of(const std::string& doc_id) const;            // 0 when unknown
  const std::string& doc_of(int alias) const;               // alias in 1..n
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }

 private:
  std::vector<std::string> doc_ids_;
};

struct RankedDoc {
  int alias = 0;
  int rank = 0;
  int score = 0;
};

struct JudgeResponse {
  JudgeMode mode = JudgeMode::pointwise;
  int score = 0;                   // pointwise label
  std::vector<RankedDoc> ranking;  // listwise, ordered by rank 1..n
  bool fallback = false;           // true when retry exhaustion substituted defaults
  int attempts = 1;                // backend attempts consumed (0 on cache hit)
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds delay{2000};
};

// One unit of judge work: the rendered prompts plus the context needed to
// validate the reply and to let reference backends look up ground truth.
struct JudgeRequest {
  JudgeMode mode = JudgeMode::pointwise;
  std::string system_prompt;
  std::string user_prompt;
  int scale_max = 10;
  AliasMap aliases;                  // listwise only
  std::string query_id;
  std::vector<std::string> doc_ids;  // prompt order
};

extern const char* const kPointwiseSystemPrompt;
extern const char* const kRankingSystemPrompt;
extern const char* const kRankingScoringSystemPrompt;
const char* system_prompt_for(JudgeMode mode);

// Renders the single query-document scoring prompt. The document body is
// expected to be pre-truncated. When include_title is set and the document
// has a title it is prepended to the search result block.
std::string render_pointwise_prompt(const Query& query, const DocumentRecord& doc,
                                    const RelevanceScale& scale, bool include_title = true);

// Renders the listwise prompt for rank_only or rank_and_score mode and
// returns it together with the alias map used for the documents.
std::pair<std::string, AliasMap> render_listwise_prompt(const Query& query,
                                                        const std::vector<const DocumentRecord*>& docs,
                                                        JudgeMode mode,
                                                        const RelevanceScale* scale);

// Extracts the first JSON object from the reply (bare or inside a fenced code
// block) and reads the integer "score" field. Throws SchemaError on any
// violation; the retry loop treats that as a failed attempt.
int parse_pointwise_response(std::string_view text, const RelevanceScale& scale);

// Parses the "ranked_documents" array and repairs it into a permutation of
// 1..n: unknown aliases are dropped, duplicates keep their first occurrence,
// absent aliases get rank n and score 0, and ranks are renumbered by a stable
// sort on (reported rank, original position). Throws SchemaError only when no
// JSON parses at all.
JudgeResponse parse_listwise_response(std::string_view text, const AliasMap& aliases, int n,
                                      JudgeMode mode, const RelevanceScale* scale);

// Ground-truth judge used for tests and simulation. Grades are rescaled onto
// 0..scale_max by round(grade * scale_max / max_grade). Listwise replies sort
// by (grade desc, doc_id asc); noise swaps each adjacent pair with the given
// probability after sorting. Pointwise noise resamples the label uniformly
// with the given probability.
JudgeResponse oracle_judge(const std::string& query_id, const std::vector<std::string>& doc_ids,
                           const Qrels& qrels, int scale_max, JudgeMode mode, double noise_rate,
                           uint64_t seed);

// A judge backend turns a request into raw reply text. Implementations must
// be safely callable from many threads.
class JudgeBackend {
 public:
  virtual ~JudgeBackend() = default;

  std::string complete(const JudgeRequest& request) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return do_complete(request);
  }
  int64_t call_count() const { return calls_.load(std::memory_order_relaxed); }

  virtual std::string kind() const = 0;
  virtual std::string model() const { return ""; }

 private:
  virtual std::string do_complete(const JudgeRequest& request) = 0;
  std::atomic<int64_t> calls_{0};
};

class OracleBackend : public JudgeBackend {
 public:
  OracleBackend(std::shared_ptr<const Qrels> qrels, double noise_rate, uint64_t seed);
  std::string kind() const override { return noise_rate_ > 0.0 ? "noisy" : "oracle"; }
  std::string model() const override;

 private:
  std::string do_complete(const JudgeRequest& request) override;
  std::shared_ptr<const Qrels> qrels_;
  double noise_rate_;
  uint64_t seed_;
};

// Replays canned responses in call order (cycling); with no responses every
// call raises a transport error. Test plumbing only.
class ScriptedBackend : public JudgeBackend {
 public:
  explicit ScriptedBackend(std::vector<std::string> responses, bool fail_always = false);
  std::string kind() const override { return "scripted"; }
  std::string model() const override { return "scripted"; }

 private:
  std::string do_complete(const JudgeRequest& request) override;
  std::vector<std::string> responses_;
  bool fail_always_;
  std::atomic<std::size_t> next_{0};
};

struct HttpJudgeConfig {
  std::string endpoint;        // e.g. http://host:port/v1/chat/completions
  std::string model;
  std::string credential_env;  // env var holding the bearer token; empty = none
  std::string response_path = "choices.0.message.content";
  int timeout_ms = 30000;
  int max_in_flight = 8;
};

// Single chat-completion POST: {model, messages:[system,user], temperature:0}.
// Returns the assistant text extracted at config.response_path. Network
// failures, non-2xx statuses and timeouts raise TransportError with distinct
// kinds.
std::string http_judge(const std::string& system_prompt, const std::string& user_prompt,
                       const HttpJudgeConfig& config);

// Bounds concurrent calls through a shared limiter.
class ConcurrencyLimiter {
 public:
  explicit ConcurrencyLimiter(int limit) : limit_(limit < 1 ? 1 : limit) {}
  void acquire();
  void release();

  class Guard {
   public:
    explicit Guard(ConcurrencyLimiter& limiter) : limiter_(limiter) { limiter_.acquire(); }
    ~Guard() { limiter_.release(); }
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;

   private:
    ConcurrencyLimiter& limiter_;
  };

 private:
  int limit_;
  int active_ = 0;
  std::mutex mutex_;
  std::condition_variable cv_;
};

class HttpBackend : public JudgeBackend {
 public:
  explicit HttpBackend(HttpJudgeConfig config);
  std::string kind() const override { return "http"; }
  std::string model() const override { return config_.model; }

 private:
  std::string do_complete(const JudgeRequest& request) override;
  HttpJudgeConfig config_;
  ConcurrencyLimiter limiter_;
};

// Content-addressed store of raw judge replies, one immutable file per key.
// Only replies that parsed successfully are stored, so retries against flaky
// backends are re-executed rather than replayed.
class ResponseCache {
 public:
  explicit ResponseCache(std::string dir);

  static std::string key(const std::string& kind, const std::string& model,
                         const std::string& system_prompt, const std::string& user_prompt);

  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& key, const std::string& kind, const std::string& model,
             const std::string& response) const;

 private:
  std::string dir_;
};

// Counters shared by all judge calls of a run. Token counts are raw
// whitespace tokens; reports apply the 1.3x proxy multiplier.
struct JudgeInstrumentation {
  std::atomic<int64_t> calls{0};
  std::atomic<int64_t> fallbacks{0};
  std::atomic<int64_t> input_ws_tokens{0};
  std::atomic<int64_t> output_ws_tokens{0};
  std::atomic<int> in_flight{0};
  std::atomic<int> peak_in_flight{0};

  void begin_call(int64_t input_tokens);
  void end_call(int64_t output_tokens, bool fallback);
};

// Executes judge requests with retries, fallbacks, optional caching and
// optional instrumentation. Thread safe.
class JudgeClient {
 public:
  JudgeClient(std::shared_ptr<JudgeBackend> backend, RetryPolicy policy = {},
              std::shared_ptr<ResponseCache> cache = nullptr,
              std::shared_ptr<JudgeInstrumentation> instrumentation = nullptr);

  JudgeResponse call(const JudgeRequest& request);
  JudgeBackend& backend() { return *backend_; }

 private:
  std::shared_ptr<JudgeBackend> backend_;
  RetryPolicy policy_;
  std::shared_ptr<ResponseCache> cache_;
  std::shared_ptr<JudgeInstrumentation> instrumentation_;
};

// Retry wrapper without caching or instrumentation: attempts the backend up
// to policy.max_attempts times (call plus parse counted together) and applies
// the fallback values on exhaustion: pointwise score 0, listwise rank n and
// score 0 for every document.
JudgeResponse judge_call(const JudgeRequest& request, JudgeBackend& backend,
                         const RetryPolicy& policy);

}  // namespace llmrank
