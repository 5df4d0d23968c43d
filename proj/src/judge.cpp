#include "llmrank/judge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "llmrank/errors.hpp"
#include "llmrank/util.hpp"

namespace llmrank {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Relevance scales
// ---------------------------------------------------------------------------

RelevanceScale::RelevanceScale(int max_points, std::vector<std::pair<int, std::string>> rubric)
    : max_points_(max_points), rubric_(std::move(rubric)) {
  if (max_points_ < 1) throw ConfigError("relevance scale needs max_points >= 1");
  if (rubric_.size() != static_cast<std::size_t>(max_points_) + 1)
    throw ConfigError("relevance scale rubric must cover every label 0..max_points");
  for (int i = 0; i <= max_points_; ++i) {
    const auto& [label, description] = rubric_[static_cast<std::size_t>(i)];
    if (label != max_points_ - i) throw ConfigError("rubric labels must be max_points..0 descending");
    if (description.empty()) throw ConfigError("rubric descriptions must be nonempty");
  }
}

std::string RelevanceScale::rubric_text() const {
  std::string out;
  for (const auto& [label, description] : rubric_) {
    if (!out.empty()) out += '\n';
    out += std::to_string(label) + ": " + description;
  }
  return out;
}

const RelevanceScale& RelevanceScale::builtin(int points) {
  static const RelevanceScale two(1, {
      {1, "Relevant - The document addresses the user's query well, providing useful information related to the topic."},
      {0, "Not relevant - The document does not address the user's query or provides little to no useful information."},
  });
  static const RelevanceScale three(2, {
      {2, "Excellent match, addresses the query comprehensively"},
      {1, "Partial match, addresses some aspects of the query"},
      {0, "Poor match, barely relevant or irrelevant to the query"},
  });
  static const RelevanceScale five(4, {
      {4, "Excellent match, addresses all or nearly all aspects of the query comprehensively"},
      {3, "Good match, covers most key aspects of the query"},
      {2, "Moderate match, partially relevant to the query"},
      {1, "Poor match, only marginally related to the query"},
      {0, "Irrelevant, no meaningful connection to the query"},
  });
  static const RelevanceScale seven(6, {
      {6, "Perfect match, addresses all aspects of the query comprehensively"},
      {5, "Excellent match, covers almost all aspects of the query in detail"},
      {4, "Good match, addresses most aspects of the query"},
      {3, "Average match, partially relevant to the query"},
      {2, "Below average match, touches on the query topic but lacks depth"},
      {1, "Poor match, only marginally related to the query"},
      {0, "Completely irrelevant, no connection to the query"},
  });
  static const RelevanceScale eleven(10, {
      {10, "Perfect match, addresses all aspects of the query comprehensively"},
      {9, "Excellent match, covers almost all aspects of the query in detail"},
      {8, "Very good match, addresses most aspects of the query"},
      {7, "Good match, covers several key aspects of the query"},
      {6, "Above average match, addresses some important aspects of the query"},
      {5, "Average match, partially relevant to the query"},
      {4, "Below average match, touches on the query topic but lacks depth"},
      {3, "Poor match, only marginally related to the query"},
      {2, "Very poor match, barely relevant to the query"},
      {1, "Extremely poor match, only contains a keyword or phrase from the query"},
      {0, "Completely irrelevant, no connection to the query"},
  });
  switch (points) {
    case 2: return two;
    case 3: return three;
    case 5: return five;
    case 7: return seven;
    case 11: return eleven;
    default: throw ConfigError("no built-in relevance scale with " + std::to_string(points) + " points");
  }
}

// ---------------------------------------------------------------------------
// Alias map
// ---------------------------------------------------------------------------

int AliasMap::alias_of(const std::string& doc_id) const {
  for (std::size_t i = 0; i < doc_ids_.size(); ++i)
    if (doc_ids_[i] == doc_id) return static_cast<int>(i) + 1;
  return 0;
}

const std::string& AliasMap::doc_of(int alias) const {
  if (alias < 1 || alias > size()) throw std::out_of_range("alias out of range");
  return doc_ids_[static_cast<std::size_t>(alias) - 1];
}

// ---------------------------------------------------------------------------
// Prompt templates
// ---------------------------------------------------------------------------

const char* const kPointwiseSystemPrompt =
    "You are an AI assistant tasked with evaluating a search result based on its relevance to a "
    "user's query. Your goal is to analyze the search result and assign it a relevance score.";

const char* const kRankingSystemPrompt =
    "You are an AI assistant tasked with ranking search results based on their relevance to a "
    "user's query.";

const char* const kRankingScoringSystemPrompt =
    "You are an AI assistant tasked with ranking and scoring search results based on their "
    "relevance to a user's query.";

const char* system_prompt_for(JudgeMode mode) {
  switch (mode) {
    case JudgeMode::pointwise: return kPointwiseSystemPrompt;
    case JudgeMode::rank_only: return kRankingSystemPrompt;
    case JudgeMode::rank_and_score: return kRankingScoringSystemPrompt;
  }
  return kPointwiseSystemPrompt;
}

namespace {

constexpr const char* kPointwiseTemplate =
    R"(User query: """{user_query}"""
Search result:
"""
{search_result}
"""
Use the following 0-{max_points} scale to score the relevance of the search result:
{scale}
Instructions:
1. Carefully read and understand the content of the search result.
2. Compare it to the user's query, considering how well it addresses the user's information need.
3. Determine a relevance score based on the scoring system above.
Provide your score as a JSON dictionary with the following format:
```json
{"score": integer in the range 0-{max_points} representing the relevance score of the search result}
```
Reminder: the user's query is "{user_query}")";

constexpr const char* kRankingTemplate =
    R"(User query: """{user_query}"""
Search results:
"""
{search_results}
"""
The search results consist of a list of documents. Each document has the form:
<document document_id="unique identifier of this document">
<title>Title of This Document</title>
<content>Content of this document</content>
</document>
For each search result:
1. Carefully read and understand the content.
2. Compare it to the user's query, considering how well it addresses the user's information need.
Provide your response as a JSON object with a top level key "ranked_documents", whose value is a list of dictionaries where each dictionary contains the following key-value pairs:
- "document_id": unique identifier found as an attribute in the opening <document document_id="unique identifier of this document"> tag
- "rank": rank of the document based on relevance
Example of valid JSON format:
```json
{"ranked_documents": [{"document_id": "unique_id_1", "rank": 1}, {"document_id": "unique_id_2", "rank": 2}, ...]}
```
Ensure that the "ranked_documents" list is sorted in decreasing order of relevance, with the most relevant documents appearing first. The search results contain {num_documents} documents, so the document ranks should end at {num_documents}. Reminder: the user's query is """{user_query}""")";

constexpr const char* kRankingScoringTemplate =
    R"(User query: """{user_query}"""
Search results:
"""
{search_results}
"""
The search results consist of a list of documents. Each document has the form:
<document document_id="unique identifier of this document">
<title>Title of This Document</title>
<content>Content of this document</content>
</document>
Use the following 0-{max_points} scale to score the relevance of each search result:
{scale}
For each search result:
1. Carefully read and understand the content.
2. Compare it to the user's query, considering how well it addresses the user's information need.
3. Determine a relevance score based on the scoring system above.
Provide your response as a JSON object with a top level key "ranked_documents", whose value is a list of dictionaries where each dictionary contains the following key-value pairs:
- "document_id": unique identifier found as an attribute in the opening <document document_id="unique identifier of this document"> tag
- "rank": rank of the document based on relevance
- "score": relevance score of the document
Example of valid JSON format:
```json
{"ranked_documents": [{"document_id": "unique_id_1", "rank": 1, "score": {example_score_1}}, {"document_id": "unique_id_2", "rank": 2, "score": {example_score_2}}, ...]}
```
Ensure that the "ranked_documents" list is sorted in decreasing order of relevance, with the most relevant documents appearing first. The search results contain {num_documents} documents, so the document ranks should end at {num_documents}. Reminder: the user's query is """{user_query}""")";

// Substitutes {name} placeholders in a single pass over the template, so
// brace sequences inside substituted values are never re-scanned.
std::string render_template(std::string_view tmpl,
                            const std::vector<std::pair<std::string, std::string>>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    std::size_t best = std::string_view::npos;
    std::size_t best_var = 0;
    for (std::size_t v = 0; v < vars.size(); ++v) {
      std::string token = "{" + vars[v].first + "}";
      std::size_t at = tmpl.find(token, pos);
      if (at < best) {
        best = at;
        best_var = v;
      }
    }
    if (best == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, best - pos));
    out.append(vars[best_var].second);
    pos = best + vars[best_var].first.size() + 2;
  }
  return out;
}

}  // namespace

std::string render_pointwise_prompt(const Query& query, const DocumentRecord& doc,
                                    const RelevanceScale& scale, bool include_title) {
  std::string search_result;
  if (include_title && doc.title && !doc.title->empty()) search_result = *doc.title + "\n";
  search_result += doc.body;
  return render_template(kPointwiseTemplate,
                         {{"user_query", query.text},
                          {"search_result", search_result},
                          {"max_points", std::to_string(scale.max_points())},
                          {"scale", scale.rubric_text()}});
}

std::pair<std::string, AliasMap> render_listwise_prompt(const Query& query,
                                                        const std::vector<const DocumentRecord*>& docs,
                                                        JudgeMode mode,
                                                        const RelevanceScale* scale) {
  if (mode == JudgeMode::pointwise) throw ConfigError("listwise prompt requires a listwise mode");
  if (mode == JudgeMode::rank_and_score && scale == nullptr)
    throw ConfigError("rank_and_score requires a relevance scale");

  std::vector<std::string> doc_ids;
  doc_ids.reserve(docs.size());
  std::string search_results;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const DocumentRecord& d = *docs[i];
    doc_ids.push_back(d.doc_id);
    if (i > 0) search_results += '\n';
    search_results += "<document document_id=\"" + std::to_string(i + 1) + "\">\n<title>" +
                      (d.title ? *d.title : "") + "</title>\n<content>" + d.body +
                      "</content>\n</document>";
  }

  std::vector<std::pair<std::string, std::string>> vars = {
      {"user_query", query.text},
      {"search_results", search_results},
      {"num_documents", std::to_string(docs.size())},
  };
  std::string prompt;
  if (mode == JudgeMode::rank_only) {
    prompt = render_template(kRankingTemplate, vars);
  } else {
    // The schema example shows scores 8 and 6; smaller scales clamp them so
    // the example never exceeds the rubric range.
    int r = scale->max_points();
    vars.push_back({"max_points", std::to_string(r)});
    vars.push_back({"scale", scale->rubric_text()});
    vars.push_back({"example_score_1", std::to_string(std::min(8, r))});
    vars.push_back({"example_score_2", std::to_string(std::min(6, r))});
    prompt = render_template(kRankingScoringTemplate, vars);
  }
  return {std::move(prompt), AliasMap(std::move(doc_ids))};
}

// ---------------------------------------------------------------------------
// Response parsing
// ---------------------------------------------------------------------------

namespace {

// End index of a balanced bracket run starting at text[start], honoring JSON
// string quoting. Validity of the candidate is left to the JSON parser.
std::optional<std::size_t> balanced_end(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      ++depth;
    } else if (c == '}' || c == ']') {
      --depth;
      if (depth == 0) return i;
      if (depth < 0) return std::nullopt;
    }
  }
  return std::nullopt;
}

// Yields parseable JSON values embedded in free-form text, in order of their
// start position. stop returning true ends the scan.
void for_each_json_candidate(std::string_view text, bool objects_only,
                             const std::function<bool(const json&)>& stop) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '{' && (objects_only || c != '[')) continue;
    auto end = balanced_end(text, i);
    if (!end) continue;
    json parsed = json::parse(text.substr(i, *end - i + 1), nullptr, false);
    if (parsed.is_discarded()) continue;
    if (stop(parsed)) return;
    i = *end;  // skip past the parsed value
  }
}

std::optional<long long> read_integer_field(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) return std::nullopt;
  if (it->is_number_integer()) return it->get<long long>();
  if (it->is_number()) return std::llround(it->get<double>());
  return std::nullopt;
}

std::optional<int> read_alias(const json& obj) {
  auto it = obj.find("document_id");
  if (it == obj.end()) return std::nullopt;
  if (it->is_number_integer()) return it->get<int>();
  if (it->is_string()) {
    const std::string& s = it->get_ref<const std::string&>();
    char* end = nullptr;
    long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') return std::nullopt;
    return static_cast<int>(v);
  }
  return std::nullopt;
}

int parse_pointwise_impl(std::string_view text, int scale_max) {
  std::optional<json> first;
  for_each_json_candidate(text, /*objects_only=*/true, [&](const json& candidate) {
    first = candidate;
    return true;
  });
  if (!first) throw SchemaError("no JSON object found in judge reply");
  auto it = first->find("score");
  if (it == first->end()) throw SchemaError("judge reply is missing the \"score\" field");
  if (!it->is_number_integer()) throw SchemaError("judge \"score\" field is not an integer");
  long long value = it->get<long long>();
  if (value < 0 || value > scale_max)
    throw SchemaError("judge score " + std::to_string(value) + " outside 0.." +
                      std::to_string(scale_max));
  return static_cast<int>(value);
}

JudgeResponse parse_listwise_impl(std::string_view text, int n, JudgeMode mode, int scale_max) {
  bool any_json = false;
  json list = json::array();
  for_each_json_candidate(text, /*objects_only=*/false, [&](const json& candidate) {
    any_json = true;
    if (candidate.is_object()) {
      auto it = candidate.find("ranked_documents");
      if (it != candidate.end() && it->is_array()) {
        list = *it;
        return true;
      }
      return false;
    }
    if (candidate.is_array()) {
      list = candidate;
      return true;
    }
    return false;
  });
  if (!any_json) throw SchemaError("no JSON found in judge reply");

  struct Item {
    int alias;
    long long reported_rank;
    int score;
  };
  std::vector<Item> items;
  items.reserve(static_cast<std::size_t>(n));
  std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
  for (const json& el : list) {
    if (!el.is_object()) continue;
    auto alias = read_alias(el);
    if (!alias || *alias < 1 || *alias > n) continue;  // unknown aliases dropped
    if (seen[static_cast<std::size_t>(*alias)]) continue;  // duplicates keep the first
    auto rank = read_integer_field(el, "rank");
    if (!rank) continue;
    int score = 0;
    if (mode == JudgeMode::rank_and_score) {
      if (auto s = read_integer_field(el, "score"))
        score = static_cast<int>(std::clamp<long long>(*s, 0, scale_max));
    }
    seen[static_cast<std::size_t>(*alias)] = true;
    items.push_back({*alias, *rank, score});
  }
  // Aliases the judge never ranked fall to the bottom of the batch.
  for (int alias = 1; alias <= n; ++alias)
    if (!seen[static_cast<std::size_t>(alias)]) items.push_back({alias, n, 0});

  std::stable_sort(items.begin(), items.end(),
                   [](const Item& a, const Item& b) { return a.reported_rank < b.reported_rank; });

  JudgeResponse response;
  response.mode = mode;
  response.ranking.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i)
    response.ranking.push_back({items[i].alias, static_cast<int>(i) + 1, items[i].score});
  return response;
}

}  // namespace

int parse_pointwise_response(std::string_view text, const RelevanceScale& scale) {
  return parse_pointwise_impl(text, scale.max_points());
}

JudgeResponse parse_listwise_response(std::string_view text, const AliasMap& aliases, int n,
                                      JudgeMode mode, const RelevanceScale* scale) {
  (void)aliases;
  return parse_listwise_impl(text, n, mode, scale ? scale->max_points() : 0);
}

// ---------------------------------------------------------------------------
// Oracle judge
// ---------------------------------------------------------------------------

JudgeResponse oracle_judge(const std::string& query_id, const std::vector<std::string>& doc_ids,
                           const Qrels& qrels, int scale_max, JudgeMode mode, double noise_rate,
                           uint64_t seed) {
  int max_grade = std::max(qrels.max_grade(), 1);
  auto rescale = [&](int grade) {
    return static_cast<int>(std::llround(static_cast<double>(grade) * scale_max / max_grade));
  };
  Rng rng(seed);

  JudgeResponse response;
  response.mode = mode;
  if (mode == JudgeMode::pointwise) {
    int score = rescale(qrels.grade(query_id, doc_ids.at(0)));
    if (noise_rate > 0.0 && rng.next_double() < noise_rate)
      score = static_cast<int>(rng.next_below(static_cast<uint64_t>(scale_max) + 1));
    response.score = score;
    return response;
  }

  const int n = static_cast<int>(doc_ids.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    int ga = qrels.grade(query_id, doc_ids[static_cast<std::size_t>(a)]);
    int gb = qrels.grade(query_id, doc_ids[static_cast<std::size_t>(b)]);
    if (ga != gb) return ga > gb;
    return doc_ids[static_cast<std::size_t>(a)] < doc_ids[static_cast<std::size_t>(b)];
  });
  if (noise_rate > 0.0) {
    for (int i = 0; i + 1 < n; ++i)
      if (rng.next_double() < noise_rate)
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i) + 1]);
  }
  response.ranking.reserve(static_cast<std::size_t>(n));
  for (int pos = 0; pos < n; ++pos) {
    int idx = order[static_cast<std::size_t>(pos)];
    int score = mode == JudgeMode::rank_and_score
                    ? rescale(qrels.grade(query_id, doc_ids[static_cast<std::size_t>(idx)]))
                    : 0;
    response.ranking.push_back({idx + 1, pos + 1, score});
  }
  return response;
}

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

OracleBackend::OracleBackend(std::shared_ptr<const Qrels> qrels, double noise_rate, uint64_t seed)
    : qrels_(std::move(qrels)), noise_rate_(noise_rate), seed_(seed) {
  if (noise_rate_ < 0.0 || noise_rate_ > 1.0) throw ConfigError("noise rate must be in [0,1]");
  if (!qrels_) throw ConfigError("oracle backend needs qrels");
}

std::string OracleBackend::model() const {
  return "oracle(noise=" + format_double(noise_rate_) + ",seed=" + std::to_string(seed_) + ")";
}

std::string OracleBackend::do_complete(const JudgeRequest& request) {
  std::string joined;
  for (const auto& id : request.doc_ids) {
    joined += id;
    joined += '\x1f';
  }
  // Request-derived stream: identical requests judge identically no matter
  // which thread or order they are executed in.
  uint64_t stream = mix_seed(fnv1a64(request.query_id), fnv1a64(joined));
  uint64_t request_seed = mix_seed(seed_, stream);
  JudgeResponse response = oracle_judge(request.query_id, request.doc_ids, *qrels_,
                                        request.scale_max, request.mode, noise_rate_, request_seed);
  if (request.mode == JudgeMode::pointwise) {
    json reply = {{"score", response.score}};
    return reply.dump();
  }
  json docs = json::array();
  for (const RankedDoc& rd : response.ranking) {
    json item = {{"document_id", rd.alias}, {"rank", rd.rank}};
    if (request.mode == JudgeMode::rank_and_score) item["score"] = rd.score;
    docs.push_back(std::move(item));
  }
  json reply = {{"ranked_documents", std::move(docs)}};
  return reply.dump();
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> responses, bool fail_always)
    : responses_(std::move(responses)), fail_always_(fail_always) {}

std::string ScriptedBackend::do_complete(const JudgeRequest&) {
  if (fail_always_ || responses_.empty())
    throw TransportError(TransportError::Kind::network, "scripted failure");
  std::size_t idx = next_.fetch_add(1) % responses_.size();
  return responses_[idx];
}

void ConcurrencyLimiter::acquire() {
  std::unique_lock<std::mutex> lock(mutex_);
  cv_.wait(lock, [&] { return active_ < limit_; });
  ++active_;
}

void ConcurrencyLimiter::release() {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    --active_;
  }
  cv_.notify_one();
}

// ---------------------------------------------------------------------------
// Response cache
// ---------------------------------------------------------------------------

ResponseCache::ResponseCache(std::string dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::string ResponseCache::key(const std::string& kind, const std::string& model,
                               const std::string& system_prompt, const std::string& user_prompt) {
  std::string material = kind + '\x1f' + model + '\x1f' + system_prompt + '\x1f' + user_prompt;
  uint64_t lo = fnv1a64(material);
  uint64_t hi = splitmix64(lo ^ fnv1a64(model) ^ (material.size() * 0x9E3779B97F4A7C15ULL));
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  return buf;
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
  std::filesystem::path path = std::filesystem::path(dir_) / (key + ".json");
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json entry = json::parse(content, nullptr, false);
  if (entry.is_discarded() || !entry.is_object() || !entry.contains("response") ||
      !entry["response"].is_string())
    return std::nullopt;
  return entry["response"].get<std::string>();
}

void ResponseCache::store(const std::string& key, const std::string& kind,
                          const std::string& model, const std::string& response) const {
  std::filesystem::path path = std::filesystem::path(dir_) / (key + ".json");
  std::error_code ec;
  if (std::filesystem::exists(path, ec)) return;  // entries are immutable
  json entry = {{"kind", kind},
                {"model", model},
                {"response", response},
                {"timestamp", static_cast<int64_t>(std::time(nullptr))}};
  write_file_atomic(path.string(), entry.dump());
}

// ---------------------------------------------------------------------------
// Judge client
// ---------------------------------------------------------------------------

void JudgeInstrumentation::begin_call(int64_t input_tokens) {
  calls.fetch_add(1, std::memory_order_relaxed);
  input_ws_tokens.fetch_add(input_tokens, std::memory_order_relaxed);
  int now = in_flight.fetch_add(1, std::memory_order_relaxed) + 1;
  int peak = peak_in_flight.load(std::memory_order_relaxed);
  while (now > peak && !peak_in_flight.compare_exchange_weak(peak, now)) {
  }
}

void JudgeInstrumentation::end_call(int64_t output_tokens, bool fallback) {
  output_ws_tokens.fetch_add(output_tokens, std::memory_order_relaxed);
  if (fallback) fallbacks.fetch_add(1, std::memory_order_relaxed);
  in_flight.fetch_sub(1, std::memory_order_relaxed);
}

namespace {

JudgeResponse fallback_response(const JudgeRequest& request) {
  JudgeResponse response;
  response.mode = request.mode;
  response.fallback = true;
  if (request.mode != JudgeMode::pointwise) {
    int n = request.aliases.size();
    response.ranking.reserve(static_cast<std::size_t>(n));
    for (int alias = 1; alias <= n; ++alias) response.ranking.push_back({alias, n, 0});
  }
  return response;
}

JudgeResponse parse_reply(const std::string& raw, const JudgeRequest& request) {
  JudgeResponse response;
  if (request.mode == JudgeMode::pointwise) {
    response.mode = JudgeMode::pointwise;
    response.score = parse_pointwise_impl(raw, request.scale_max);
    return response;
  }
  return parse_listwise_impl(raw, request.aliases.size(), request.mode, request.scale_max);
}

JudgeResponse judge_call_core(const JudgeRequest& request, JudgeBackend& backend,
                              const RetryPolicy& policy, const ResponseCache* cache,
                              std::string* raw_out) {
  if (policy.max_attempts < 1) throw ConfigError("retry policy needs max_attempts >= 1");
  std::string cache_key;
  if (cache) {
    cache_key = ResponseCache::key(backend.kind(), backend.model(), request.system_prompt,
                                   request.user_prompt);
    if (auto hit = cache->lookup(cache_key)) {
      try {
        JudgeResponse response = parse_reply(*hit, request);
        response.attempts = 0;
        if (raw_out) *raw_out = *hit;
        return response;
      } catch (const SchemaError&) {
        // stale or damaged entry, fall through to a live call
      }
    }
  }
  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    try {
      std::string raw = backend.complete(request);
      JudgeResponse response = parse_reply(raw, request);
      response.attempts = attempt;
      if (cache) cache->store(cache_key, backend.kind(), backend.model(), raw);
      if (raw_out) *raw_out = std::move(raw);
      return response;
    } catch (const SchemaError&) {
    } catch (const TransportError&) {
    }
    if (attempt < policy.max_attempts && policy.delay.count() > 0)
      std::this_thread::sleep_for(policy.delay);
  }
  JudgeResponse response = fallback_response(request);
  response.attempts = policy.max_attempts;
  return response;
}

}  // namespace

JudgeClient::JudgeClient(std::shared_ptr<JudgeBackend> backend, RetryPolicy policy,
                         std::shared_ptr<ResponseCache> cache,
                         std::shared_ptr<JudgeInstrumentation> instrumentation)
    : backend_(std::move(backend)),
      policy_(policy),
      cache_(std::move(cache)),
      instrumentation_(std::move(instrumentation)) {
  if (!backend_) throw ConfigError("judge client needs a backend");
  if (policy_.max_attempts < 1) throw ConfigError("retry policy needs max_attempts >= 1");
}

JudgeResponse JudgeClient::call(const JudgeRequest& request) {
  if (instrumentation_) {
    int64_t input = whitespace_token_count(request.system_prompt) +
                    whitespace_token_count(request.user_prompt);
    instrumentation_->begin_call(input);
  }
  std::string raw;
  JudgeResponse response = judge_call_core(request, *backend_, policy_, cache_.get(), &raw);
  if (instrumentation_)
    instrumentation_->end_call(whitespace_token_count(raw), response.fallback);
  return response;
}

JudgeResponse judge_call(const JudgeRequest& request, JudgeBackend& backend,
                         const RetryPolicy& policy) {
  return judge_call_core(request, backend, policy, nullptr, nullptr);
}

}  // namespace llmrank
