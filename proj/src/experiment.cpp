#include "llmrank/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "llmrank/errors.hpp"
#include "llmrank/metrics.hpp"
#include "llmrank/util.hpp"

namespace llmrank {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kTokenProxyFactor = 1.3;

JudgeMode mode_from_name(std::string_view name) {
  if (name == "rank_only") return JudgeMode::rank_only;
  if (name == "rank_and_score") return JudgeMode::rank_and_score;
  if (name == "pointwise") return JudgeMode::pointwise;
  throw ConfigError("unknown mode: " + std::string(name));
}

const char* mode_name(JudgeMode mode) {
  switch (mode) {
    case JudgeMode::pointwise: return "pointwise";
    case JudgeMode::rank_only: return "rank_only";
    case JudgeMode::rank_and_score: return "rank_and_score";
  }
  return "rank_and_score";
}

// "ndcg@K" -> K, nullopt for non-ndcg metric names.
std::optional<int> ndcg_cutoff(const std::string& metric) {
  if (metric.rfind("ndcg@", 0) != 0) return std::nullopt;
  std::string_view digits(metric);
  digits.remove_prefix(5);
  int k = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || k < 1)
    throw ConfigError("bad NDCG cutoff in metric name: " + metric);
  return k;
}

std::vector<Query> load_queries(const std::string& path) {
  std::string text = read_file(path);
  std::vector<Query> queries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no;
    pos = end + 1;
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError("query line needs `id<TAB>text`", line_no);
    queries.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return queries;
}

std::unordered_map<std::string, DocumentRecord> load_corpus(const std::string& path) {
  std::string text = read_file(path);
  std::unordered_map<std::string, DocumentRecord> corpus;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (line.empty() || line == "\r") continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("doc_id") || !j.contains("body"))
      throw ParseError("corpus line is not a {doc_id, title, body} object", line_no);
    DocumentRecord doc;
    doc.doc_id = j["doc_id"].get<std::string>();
    if (j.contains("title") && j["title"].is_string()) doc.title = j["title"].get<std::string>();
    doc.body = j["body"].get<std::string>();
    corpus[doc.doc_id] = std::move(doc);
  }
  return corpus;
}

struct QueryOutcome {
  bool failed = true;
  std::vector<std::string> ranked_ids;
  std::vector<int> labels;
  int judge_calls = 0;
  int fallback_calls = 0;
};

}  // namespace

void ExperimentConfig::validate() const {
  for (const auto& [label, path] : std::initializer_list<std::pair<const char*, const std::string*>>{
           {"queries", &queries_path},
           {"qrels", &qrels_path},
           {"run_file", &run_file_path},
           {"corpus", &corpus_path}}) {
    if (path->empty()) throw ConfigError(std::string("config is missing the ") + label + " path");
    if (!fs::exists(*path)) throw ConfigError(std::string(label) + " path does not exist: " + *path);
  }
  RelevanceScale::builtin(scale_points);  // throws for unsupported sizes
  params.validate();
  if (top_k < 1) throw ConfigError("top_k must be at least 1");
  if (truncate_limit < 1) throw ConfigError("truncate_words must be at least 1");
  if (concurrency < 1) throw ConfigError("concurrency must be at least 1");
  if (judge.max_attempts < 1) throw ConfigError("judge.max_attempts must be at least 1");
  if (judge.noise_rate < 0.0 || judge.noise_rate > 1.0)
    throw ConfigError("judge.noise_rate must be in [0,1]");
  if (binarization_threshold < 1) throw ConfigError("binarization_threshold must be at least 1");
  if (metric_names.empty()) throw ConfigError("at least one metric is required");
  for (const auto& m : metric_names)
    if (!ndcg_cutoff(m) && m != "auprc" && m != "auroc")
      throw ConfigError("unknown metric: " + m);
}

ExperimentConfig config_from_json(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("config is not a JSON object");

  ExperimentConfig c;
  auto str = [&](const char* key, std::string& out) {
    if (j.contains(key)) out = j[key].get<std::string>();
  };
  str("queries", c.queries_path);
  str("qrels", c.qrels_path);
  str("run_file", c.run_file_path);
  str("corpus", c.corpus_path);
  if (j.contains("method")) c.method = method_from_name(j["method"].get<std::string>());
  if (j.contains("mode")) c.mode = mode_from_name(j["mode"].get<std::string>());
  if (j.contains("scale_points")) c.scale_points = j["scale_points"].get<int>();
  if (j.contains("window")) c.params.window = j["window"].get<int>();
  if (j.contains("overlap")) c.params.overlap = j["overlap"].get<int>();
  if (j.contains("pivots")) c.params.num_pivots = j["pivots"].get<int>();
  if (j.contains("thresholds")) c.params.thresholds = j["thresholds"].get<std::vector<int>>();
  if (j.contains("top_k")) c.top_k = j["top_k"].get<int>();
  if (j.contains("truncate_words")) c.truncate_limit = j["truncate_words"].get<int>();
  if (j.contains("concurrency")) c.concurrency = j["concurrency"].get<int>();
  str("cache_dir", c.cache_dir);
  str("output_dir", c.output_dir);
  if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
  if (j.contains("metrics")) c.metric_names = j["metrics"].get<std::vector<std::string>>();
  if (j.contains("binarization_threshold"))
    c.binarization_threshold = j["binarization_threshold"].get<int>();
  if (j.contains("include_title_in_pointwise"))
    c.include_title_in_pointwise = j["include_title_in_pointwise"].get<bool>();
  if (j.contains("per_query_auc")) c.per_query_auc = j["per_query_auc"].get<bool>();
  str("tag", c.tag);

  if (j.contains("judge")) {
    const json& jj = j["judge"];
    if (jj.contains("kind")) c.judge.kind = jj["kind"].get<std::string>();
    if (jj.contains("noise_rate")) c.judge.noise_rate = jj["noise_rate"].get<double>();
    if (jj.contains("seed")) c.judge.seed = jj["seed"].get<uint64_t>();
    if (jj.contains("responses"))
      c.judge.scripted_responses = jj["responses"].get<std::vector<std::string>>();
    if (jj.contains("fail")) c.judge.scripted_fail = jj["fail"].get<bool>();
    if (jj.contains("endpoint")) c.judge.http.endpoint = jj["endpoint"].get<std::string>();
    if (jj.contains("model")) c.judge.http.model = jj["model"].get<std::string>();
    if (jj.contains("credential_env"))
      c.judge.http.credential_env = jj["credential_env"].get<std::string>();
    if (jj.contains("response_path"))
      c.judge.http.response_path = jj["response_path"].get<std::string>();
    if (jj.contains("timeout_ms")) c.judge.http.timeout_ms = jj["timeout_ms"].get<int>();
    if (jj.contains("max_in_flight")) c.judge.http.max_in_flight = jj["max_in_flight"].get<int>();
    if (jj.contains("max_attempts")) c.judge.max_attempts = jj["max_attempts"].get<int>();
    if (jj.contains("retry_delay_ms")) c.judge.retry_delay_ms = jj["retry_delay_ms"].get<int>();
  }
  if (c.tag.empty()) c.tag = method_name(c.method);
  return c;
}

std::shared_ptr<JudgeBackend> make_backend(const JudgeBackendSettings& settings,
                                           std::shared_ptr<const Qrels> qrels) {
  if (settings.kind == "oracle" || settings.kind == "noisy") {
    return std::make_shared<OracleBackend>(std::move(qrels), settings.noise_rate, settings.seed);
  }
  if (settings.kind == "scripted")
    return std::make_shared<ScriptedBackend>(settings.scripted_responses, settings.scripted_fail);
  if (settings.kind == "http") return std::make_shared<HttpBackend>(settings.http);
  throw ConfigError("unknown judge kind: " + settings.kind);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();

  auto queries = load_queries(config.queries_path);
  if (queries.empty()) throw ConfigError("queries file is empty");
  auto corpus = load_corpus(config.corpus_path);
  auto qrels = std::make_shared<Qrels>(parse_qrels(read_file(config.qrels_path)));
  RunMap bootstrap = parse_run_file(read_file(config.run_file_path));

  const RelevanceScale& scale = RelevanceScale::builtin(config.scale_points);
  auto backend = make_backend(config.judge, qrels);
  std::shared_ptr<ResponseCache> cache;
  if (!config.cache_dir.empty()) cache = std::make_shared<ResponseCache>(config.cache_dir);
  auto instrumentation = std::make_shared<JudgeInstrumentation>();
  RetryPolicy policy{config.judge.max_attempts,
                     std::chrono::milliseconds(config.judge.retry_delay_ms)};
  JudgeClient client(backend, policy, cache, instrumentation);

  // Average document length feeds the analytic token formulas.
  std::atomic<int64_t> doc_ws_tokens{0};
  std::atomic<int64_t> doc_count{0};

  std::vector<QueryOutcome> outcomes(queries.size());
  parallel_for(queries.size(), config.concurrency, [&](std::size_t qi) {
    QueryOutcome& slot = outcomes[qi];
    try {
      const Query& query = queries[qi];
      auto hits = bootstrap.find(query.query_id);
      if (hits == bootstrap.end() || hits->second.empty()) return;  // nothing to rank

      std::vector<std::pair<DocumentRecord, double>> scored;
      scored.reserve(std::min<std::size_t>(hits->second.size(),
                                           static_cast<std::size_t>(config.top_k)));
      for (const ScoredDoc& hit : hits->second) {
        if (scored.size() >= static_cast<std::size_t>(config.top_k)) break;
        auto doc_it = corpus.find(hit.doc_id);
        if (doc_it == corpus.end()) continue;  // unknown candidate, skip
        DocumentRecord doc = doc_it->second;
        doc.body = truncate_words(doc.body, static_cast<std::size_t>(config.truncate_limit));
        doc_ws_tokens.fetch_add(whitespace_token_count(doc.body), std::memory_order_relaxed);
        doc_count.fetch_add(1, std::memory_order_relaxed);
        scored.emplace_back(std::move(doc), hit.score);
      }
      if (scored.empty()) return;

      RankingTask task = make_ranking_task(query, std::move(scored));
      AlgorithmParams params = config.params;
      params.seed = mix_seed(config.seed, fnv1a64(query.query_id));

      RankOutcome ranked;
      switch (config.method) {
        case Method::pointwise:
          ranked = pointwise_rank(task, client, scale, config.include_title_in_pointwise,
                                  config.concurrency);
          break;
        case Method::bubble:
          ranked = bubble_rank(task, client, params, config.mode,
                               config.mode == JudgeMode::rank_and_score ? &scale : nullptr);
          break;
        case Method::quick:
          ranked = quicksort_rank(task, client, params, config.mode,
                                  config.mode == JudgeMode::rank_and_score ? &scale : nullptr,
                                  config.concurrency);
          break;
      }
      slot.ranked_ids.reserve(ranked.ranked.size());
      for (const Candidate& c : ranked.ranked) slot.ranked_ids.push_back(c.doc.doc_id);
      slot.labels = std::move(ranked.labels);
      slot.judge_calls = ranked.judge_calls;
      slot.fallback_calls = ranked.fallback_calls;
      slot.failed = false;
    } catch (const std::exception&) {
      slot.failed = true;  // omitted from the run file, scored 0
    }
  });

  fs::create_directories(config.output_dir);
  const std::string base = (fs::path(config.output_dir) / config.tag).string();

  // Run file and labels, successful queries only.
  std::map<std::string, std::vector<std::string>> rankings;
  for (std::size_t qi = 0; qi < queries.size(); ++qi)
    if (!outcomes[qi].failed) rankings[queries[qi].query_id] = outcomes[qi].ranked_ids;

  ExperimentResult result;
  result.run_file_path = base + ".run";
  write_file_atomic(result.run_file_path, write_run_file(rankings, config.tag));

  std::map<std::string, std::size_t> index_of;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) index_of[queries[qi].query_id] = qi;

  std::string labels_csv = "query_id,doc_id,label\n";
  for (const auto& [qid, docs] : rankings) {
    const QueryOutcome& o = outcomes[index_of[qid]];
    for (std::size_t i = 0; i < docs.size(); ++i)
      labels_csv += qid + "," + docs[i] + "," + std::to_string(o.labels[i]) + "\n";
  }
  result.labels_path = base + "_labels.csv";
  write_file_atomic(result.labels_path, labels_csv);

  // Per-query metrics. Ranking metrics score failed queries 0; the AUC rows
  // are only emitted where both classes exist and labels were produced.
  BinarizationRule rule{config.binarization_threshold};
  std::map<std::string, PerQueryMetric> per_metric;
  std::vector<LabeledScore> pooled;
  std::map<std::string, int> empty_grades;
  for (const auto& [qid, qi] : index_of) {
    const QueryOutcome& o = outcomes[qi];
    const auto* grades = qrels->for_query(qid);
    std::vector<LabeledScore> samples;
    if (!o.failed) {
      samples.reserve(o.ranked_ids.size());
      for (std::size_t i = 0; i < o.ranked_ids.size(); ++i) {
        LabeledScore s;
        s.doc_id = o.ranked_ids[i];
        s.model_score = static_cast<double>(o.labels[i]) / scale.max_points();
        s.relevant = binarize(qrels->grade(qid, s.doc_id), rule);
        samples.push_back(std::move(s));
      }
      pooled.insert(pooled.end(), samples.begin(), samples.end());
    }
    for (const std::string& metric : config.metric_names) {
      if (auto k = ndcg_cutoff(metric)) {
        per_metric[metric][qid] =
            o.failed ? 0.0 : ndcg_at_k(o.ranked_ids, grades ? *grades : empty_grades, *k);
      } else if (!o.failed) {
        auto value = metric == "auroc" ? auroc(samples) : auprc(samples);
        if (value) per_metric[metric][qid] = *value;
      }
    }
  }

  std::string metrics_csv = "query_id,metric,value\n";
  for (const auto& [qid, qi] : index_of) {
    for (const std::string& metric : config.metric_names) {
      auto mit = per_metric.find(metric);
      if (mit == per_metric.end()) continue;
      auto vit = mit->second.find(qid);
      if (vit == mit->second.end()) continue;
      metrics_csv += qid + "," + metric + "," + format_double(vit->second) + "\n";
    }
  }
  result.metrics_path = base + "_metrics.csv";
  write_file_atomic(result.metrics_path, metrics_csv);

  // Aggregates: ranking metrics average over every query (failed ones as 0),
  // AUC pools all scored pairs unless per-query averaging was requested.
  for (const std::string& metric : config.metric_names) {
    if (ndcg_cutoff(metric)) {
      double sum = 0.0;
      for (const auto& [qid, v] : per_metric[metric]) sum += v;
      result.aggregate[metric] = sum / static_cast<double>(queries.size());
    } else if (config.per_query_auc) {
      const auto& values = per_metric[metric];
      if (!values.empty()) {
        double sum = 0.0;
        for (const auto& [qid, v] : values) sum += v;
        result.aggregate[metric] = sum / static_cast<double>(values.size());
      }
    } else {
      auto value = metric == "auroc" ? auroc(pooled) : auprc(pooled);
      if (value) result.aggregate[metric] = *value;
    }
  }

  // Budget report: analytic estimate at nominal top_k scaled to the number of
  // ranked queries, measured side from the shared instrumentation.
  BudgetParams budget_params;
  budget_params.num_docs = config.top_k;
  budget_params.window = config.params.window;
  budget_params.overlap = config.params.overlap;
  budget_params.num_pivots = config.params.num_pivots;
  budget_params.thresholds = config.params.thresholds;
  int64_t docs_seen = doc_count.load();
  budget_params.avg_doc_tokens =
      docs_seen > 0 ? kTokenProxyFactor * static_cast<double>(doc_ws_tokens.load()) /
                          static_cast<double>(docs_seen)
                    : 0.0;
  BudgetReport report = measured_report(config.method, budget_params, *instrumentation);
  int ranked_queries = static_cast<int>(rankings.size());
  report.input_tokens_formula *= ranked_queries;
  report.output_tokens_formula *= ranked_queries;
  result.budget_path = base + "_budget.json";
  write_file_atomic(result.budget_path, report.to_json() + "\n");

  result.queries_total = static_cast<int>(queries.size());
  for (const auto& o : outcomes) {
    result.queries_failed += o.failed ? 1 : 0;
    result.judge_calls += o.judge_calls;
    result.fallback_calls += o.fallback_calls;
  }
  result.backend_calls = backend->call_count();

  std::string summary;
  summary += "method=" + std::string(method_name(config.method)) +
             " mode=" + mode_name(config.mode) + " scale=" + std::to_string(config.scale_points) +
             " tag=" + config.tag + "\n";
  summary += "queries=" + std::to_string(result.queries_total) +
             " failed=" + std::to_string(result.queries_failed) + "\n";
  for (const auto& [metric, value] : result.aggregate) {
    std::string how = ndcg_cutoff(metric) ? "mean" : (config.per_query_auc ? "per-query mean" : "pooled");
    summary += metric + " (" + how + "): " + format_double(value) + "\n";
  }
  summary += "judge calls=" + std::to_string(result.judge_calls) +
             " fallbacks=" + std::to_string(result.fallback_calls) +
             " backend calls=" + std::to_string(result.backend_calls) + "\n";
  if (config.method != Method::pointwise) {
    int reuse = config.method == Method::bubble ? config.params.overlap : config.params.num_pivots;
    double exact = 0.0;
    double denom = static_cast<double>(config.top_k - reuse);
    exact = 1.0;
    for (int t : config.params.thresholds) exact += static_cast<double>(t - reuse) / denom;
    summary += "telescoping multiplier: exact " + format_double(exact) + ", text approximation " +
               format_double(text_multiplier(budget_params)) + "\n";
  }
  summary += "artifacts: " + result.run_file_path + " " + result.labels_path + " " +
             result.metrics_path + " " + result.budget_path + "\n";
  result.summary_text = summary;
  return result;
}

namespace {

std::string find_metrics_csv(const std::string& dir) {
  std::vector<std::string> hits;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (name.size() > 12 && name.substr(name.size() - 12) == "_metrics.csv")
      hits.push_back(entry.path().string());
  }
  if (hits.size() != 1)
    throw ConfigError("expected exactly one *_metrics.csv in " + dir + ", found " +
                      std::to_string(hits.size()));
  return hits.front();
}

PerQueryMetric load_metric_column(const std::string& csv_path, const std::string& metric) {
  std::string text = read_file(csv_path);
  PerQueryMetric values;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty() || line_no == 1) continue;  // header
    std::size_t c1 = line.find(',');
    std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos) throw ParseError("metrics CSV row needs 3 columns", line_no);
    std::string qid = line.substr(0, c1);
    std::string name = line.substr(c1 + 1, c2 - c1 - 1);
    if (name != metric) continue;
    values[qid] = std::stod(line.substr(c2 + 1));
  }
  return values;
}

}  // namespace

CompareResult compare_runs(const std::string& dir_a, const std::string& dir_b,
                           const std::string& metric, int replicates, double alpha, uint64_t seed,
                           const std::string& out_dir) {
  PerQueryMetric a = load_metric_column(find_metrics_csv(dir_a), metric);
  PerQueryMetric b = load_metric_column(find_metrics_csv(dir_b), metric);
  if (a.empty() || b.empty())
    throw ConfigError("metric " + metric + " not present in both runs");

  std::set<std::string> qa, qb;
  for (const auto& [qid, v] : a) qa.insert(qid);
  for (const auto& [qid, v] : b) qb.insert(qid);
  if (qa != qb) throw ConfigError("runs cover different query sets; refusing to compare");

  CompareResult result;
  result.deltas = paired_delta(a, b);
  result.bootstrap = bootstrap_mean(result.deltas, replicates, alpha, seed);
  result.flag = significance_flag(result.bootstrap);

  std::string csv = "query_id,delta\n";
  for (const auto& [qid, d] : result.deltas) csv += qid + "," + format_double(d) + "\n";

  std::string summary;
  summary += "metric: " + metric + "\n";
  summary += "queries: " + std::to_string(result.deltas.size()) + "\n";
  summary += "mean delta (A - B): " + format_double(result.bootstrap.point_estimate) + "\n";
  summary += "CI [" + format_double(result.bootstrap.ci_low) + ", " +
             format_double(result.bootstrap.ci_high) + "] at alpha=" + format_double(alpha) +
             " (B=" + std::to_string(replicates) + ", seed=" + std::to_string(seed) + ")\n";
  summary += "significance: " + std::string(significance_name(result.flag)) + "\n";
  result.summary_text = summary;

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    result.csv_path = (fs::path(out_dir) / ("compare_" + metric + ".csv")).string();
    result.summary_path = (fs::path(out_dir) / ("compare_" + metric + "_summary.txt")).string();
    write_file_atomic(result.csv_path, csv);
    write_file_atomic(result.summary_path, summary);
  }
  return result;
}

SynthPaths synth_dataset(const SynthSpec& spec, const std::string& out_dir) {
  if (spec.num_queries < 1 || spec.docs_per_query < 1)
    throw ConfigError("synth needs at least one query and one document");
  if (spec.relevant_per_query > spec.docs_per_query)
    throw ConfigError("relevant_per_query cannot exceed docs_per_query");
  if (spec.max_grade < 1) throw ConfigError("max_grade must be at least 1");

  static const char* kWordBank[] = {
      "ledger", "filing", "granite", "harbor", "meridian", "lattice", "orchard", "signal",
      "basalt", "commons", "drift", "estuary", "foundry", "gable", "hollow", "isthmus",
      "junction", "kiln", "lantern", "mooring", "aperture", "bastion", "cobble", "derrick",
  };
  constexpr std::size_t kBankSize = sizeof(kWordBank) / sizeof(kWordBank[0]);

  std::string queries_tsv, corpus_jsonl, qrels_txt, run_txt;
  Rng rng(spec.seed);

  for (int qi = 0; qi < spec.num_queries; ++qi) {
    std::string qid = "q" + std::to_string(qi + 1);
    std::string topic = kWordBank[rng.next_below(kBankSize)];
    queries_tsv += qid + "\tinformation about " + topic + " records " + qid + "\n";

    std::vector<int> grades(static_cast<std::size_t>(spec.docs_per_query), 0);
    std::vector<std::size_t> doc_order(static_cast<std::size_t>(spec.docs_per_query));
    for (std::size_t i = 0; i < doc_order.size(); ++i) doc_order[i] = i;
    shuffle_in_place(doc_order, rng);
    for (int r = 0; r < spec.relevant_per_query; ++r)
      grades[doc_order[static_cast<std::size_t>(r)]] =
          1 + static_cast<int>(rng.next_below(static_cast<uint64_t>(spec.max_grade)));

    struct DocRow {
      std::string id;
      double score;
    };
    std::vector<DocRow> rows;
    rows.reserve(static_cast<std::size_t>(spec.docs_per_query));
    for (int di = 0; di < spec.docs_per_query; ++di) {
      std::string did = qid + "-d" + std::to_string(di + 1);
      std::string body = "passage " + did + " covering " + topic;
      for (int w = 0; w < 24; ++w) body += std::string(" ") + kWordBank[rng.next_below(kBankSize)];
      json doc = {{"doc_id", did},
                  {"title", "Document " + std::to_string(di + 1) + " (" + qid + ")"},
                  {"body", body}};
      corpus_jsonl += doc.dump() + "\n";
      int grade = grades[static_cast<std::size_t>(di)];
      qrels_txt += qid + " 0 " + did + " " + std::to_string(grade) + "\n";
      // Retrieval prior: correlated with the grade but noisy enough to leave
      // real sorting work for the rankers.
      double score = grade + rng.next_double() * (1.2 * spec.max_grade);
      rows.push_back({did, score});
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const DocRow& x, const DocRow& y) { return x.score > y.score; });
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i > 0 && rows[i].score >= rows[i - 1].score)
        rows[i].score = std::nextafter(rows[i - 1].score, -1.0);
      run_txt += qid + " Q0 " + rows[i].id + " " + std::to_string(i + 1) + " " +
                 format_double(rows[i].score) + " synth-bm25\n";
    }
  }

  fs::create_directories(out_dir);
  SynthPaths paths;
  paths.queries = (fs::path(out_dir) / "queries.tsv").string();
  paths.corpus = (fs::path(out_dir) / "corpus.jsonl").string();
  paths.qrels = (fs::path(out_dir) / "qrels.txt").string();
  paths.run = (fs::path(out_dir) / "bootstrap.run").string();
  write_file_atomic(paths.queries, queries_tsv);
  write_file_atomic(paths.corpus, corpus_jsonl);
  write_file_atomic(paths.qrels, qrels_txt);
  write_file_atomic(paths.run, run_txt);
  return paths;
}

}  // namespace llmrank
