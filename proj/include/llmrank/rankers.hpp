#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "llmrank/corpus.hpp"
#include "llmrank/judge.hpp"

namespace llmrank {

enum class Method { pointwise, bubble, quick };
const char* method_name(Method method);
Method method_from_name(std::string_view name);

// Per-pass anchor value for a pivot: (-mean within-batch rank, mean score),
// compared lexicographically with both components descending.
struct PivotScore {
  double neg_mean_rank = 0.0;
  double mean_score = 0.0;
};

PivotScore make_pivot_score(const std::vector<int>& ranks, const std::vector<int>& scores);
PivotScore average_pivot_scores(const PivotScore& a, const PivotScore& b);

struct SortKey {
  PivotScore pivot_score;
  double llm_score = 0.0;
  double bootstrap = 0.0;
};

// Lexicographic order on (pivot_score, llm_score, bootstrap), every component
// descending, exact comparison. Negative when a precedes b in the final
// ranking, zero on full ties (callers use a stable sort to preserve input
// order).
int compare_sort_keys(const SortKey& a, const SortKey& b);

struct Candidate {
  DocumentRecord doc;
  double bootstrap_score = 0.0;
  std::vector<int> llm_ranks;   // within-batch ranks, current pass
  std::vector<int> llm_scores;  // scores, current pass
  std::vector<int> all_scores;  // every score received; feeds the final label
  int left_pivot = -1;          // candidate indices within the pass prefix
  int right_pivot = -1;
  std::optional<SortKey> sort_key;
};

struct RankingTask {
  Query query;
  std::vector<Candidate> candidates;  // decreasing bootstrap_score
  int num_candidates() const { return static_cast<int>(candidates.size()); }
};

// Sorts by decreasing bootstrap score (stable, so upstream rank order breaks
// ties) and wraps the documents as candidates.
RankingTask make_ranking_task(Query query,
                              std::vector<std::pair<DocumentRecord, double>> scored_docs);

struct AlgorithmParams {
  int window = 20;                      // listwise batch size W
  int overlap = 10;                     // sliding window overlap V
  int num_pivots = 10;                  // quicksort pivots P
  std::vector<int> thresholds = {50, 20};  // telescoping truncations, strictly decreasing
  uint64_t seed = 0;
  void validate() const;
};

struct RankOutcome {
  std::vector<Candidate> ranked;  // final order, exactly the input candidates
  std::vector<int> labels;        // parallel to ranked; mean score, half-up
  int judge_calls = 0;
  int fallback_calls = 0;
};

// Mean of the collected scores rounded half up; 0 when no scores were seen.
int final_label(const std::vector<int>& scores);

// Deterministic quantile-based pivot choice: the candidates whose bootstrap
// scores sit nearest the evenly spaced quantiles (k-0.5)/num_pivots, score
// ties broken by doc_id, collisions topped up with the highest unpicked
// scores. Returns ascending candidate indices within [0, prefix).
std::vector<std::size_t> select_pivots(const std::vector<Candidate>& candidates,
                                       std::size_t prefix, int num_pivots);

// Window start offsets for one bubbling pass over [0, threshold): from the
// bottom upward in steps of window-overlap, final window clamped to 0.
std::vector<int> bubble_window_starts(int threshold, int window, int overlap);

// Judges every candidate once and orders by (label desc, bootstrap desc,
// doc_id asc).
RankOutcome pointwise_rank(const RankingTask& task, JudgeClient& judge,
                           const RelevanceScale& scale, bool include_title = true,
                           int max_workers = 1);

// Sliding-window bubbling passes over the telescoped prefixes; windows are
// judged strictly in sequence and reordered in place by the returned ranks.
RankOutcome bubble_rank(const RankingTask& task, JudgeClient& judge,
                        const AlgorithmParams& params, JudgeMode mode,
                        const RelevanceScale* scale);

// Multi-pivot partition passes over the telescoped prefixes: every batch is
// judged together with the shared pivots (batches may run concurrently), the
// prefix is then re-sorted by (pivot score, llm score, bootstrap).
RankOutcome quicksort_rank(const RankingTask& task, JudgeClient& judge,
                           const AlgorithmParams& params, JudgeMode mode,
                           const RelevanceScale* scale, int max_workers = 1);

}  // namespace llmrank
