#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "llmrank/budget.hpp"
#include "llmrank/corpus.hpp"
#include "llmrank/judge.hpp"
#include "llmrank/rankers.hpp"
#include "llmrank/stats.hpp"

namespace llmrank {

struct JudgeBackendSettings {
  std::string kind = "oracle";  // oracle | noisy | scripted | http
  double noise_rate = 0.0;
  uint64_t seed = 0;
  std::vector<std::string> scripted_responses;
  bool scripted_fail = false;
  HttpJudgeConfig http;
  int max_attempts = 3;
  int retry_delay_ms = 2000;
};

struct ExperimentConfig {
  std::string queries_path;
  std::string qrels_path;
  std::string run_file_path;  // bootstrap candidates, TREC run format
  std::string corpus_path;    // JSONL of {doc_id, title, body}

  Method method = Method::pointwise;
  JudgeMode mode = JudgeMode::rank_and_score;  // ignored for pointwise
  int scale_points = 11;
  AlgorithmParams params;
  int top_k = 100;
  int truncate_limit = 300;

  JudgeBackendSettings judge;
  int concurrency = 8;
  std::string cache_dir;  // empty disables caching
  std::string output_dir = "out";
  uint64_t seed = 0;
  std::vector<std::string> metric_names = {"ndcg@10", "auprc", "auroc"};
  int binarization_threshold = 1;
  bool include_title_in_pointwise = true;
  bool per_query_auc = false;  // aggregate AUC per query instead of pooled
  std::string tag;             // defaults to the method name

  void validate() const;
};

ExperimentConfig config_from_json(const std::string& json_text);

struct ExperimentResult {
  std::string run_file_path;
  std::string labels_path;
  std::string metrics_path;
  std::string budget_path;
  int queries_total = 0;
  int queries_failed = 0;
  int64_t judge_calls = 0;
  int64_t fallback_calls = 0;
  int64_t backend_calls = 0;
  std::map<std::string, double> aggregate;  // metric name -> dataset value
  std::string summary_text;
};

// Executes the configured method over every query: builds the candidate list
// from the top bootstrap hits, truncates bodies, ranks, and writes the run
// file, labels CSV, per-query metrics CSV and budget JSON into output_dir.
// Queries whose ranking could not run at all (no candidates, internal error)
// are omitted from the run file and scored 0; judge failures are absorbed by
// the retry fallbacks and never abort the run.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct CompareResult {
  BootstrapResult bootstrap;
  Significance flag = Significance::not_significant;
  PerQueryMetric deltas;
  std::string csv_path;
  std::string summary_path;
  std::string summary_text;
};

// Per-query metric deltas between two run directories plus a bootstrap
// confidence interval over the mean delta. Both runs must cover the same
// query set.
CompareResult compare_runs(const std::string& dir_a, const std::string& dir_b,
                           const std::string& metric, int replicates, double alpha, uint64_t seed,
                           const std::string& out_dir);

struct SynthSpec {
  int num_queries = 3;
  int docs_per_query = 100;
  int relevant_per_query = 10;
  int max_grade = 3;
  uint64_t seed = 7;
};

struct SynthPaths {
  std::string queries;
  std::string corpus;
  std::string qrels;
  std::string run;
};

// Writes a deterministic synthetic dataset: queries.tsv, corpus.jsonl,
// qrels.txt and bootstrap.run whose scores are a seeded noisy function of the
// grade, so oracle-driven end-to-end experiments are possible offline.
SynthPaths synth_dataset(const SynthSpec& spec, const std::string& out_dir);

// Shared factory used by run_experiment and the CLI.
std::shared_ptr<JudgeBackend> make_backend(const JudgeBackendSettings& settings,
                                           std::shared_ptr<const Qrels> qrels);

}  // namespace llmrank
