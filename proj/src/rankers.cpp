#include "llmrank/rankers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "llmrank/errors.hpp"
#include "llmrank/util.hpp"

namespace llmrank {

const char* method_name(Method method) {
  switch (method) {
    case Method::pointwise: return "pointwise";
    case Method::bubble: return "bubble";
    case Method::quick: return "quick";
  }
  return "pointwise";
}

Method method_from_name(std::string_view name) {
  if (name == "pointwise") return Method::pointwise;
  if (name == "bubble") return Method::bubble;
  if (name == "quick" || name == "quicksort") return Method::quick;
  throw ConfigError("unknown method: " + std::string(name));
}

namespace {

double mean_of(const std::vector<int>& values) {
  if (values.empty()) return 0.0;
  long long sum = std::accumulate(values.begin(), values.end(), 0LL);
  return static_cast<double>(sum) / static_cast<double>(values.size());
}

}  // namespace

PivotScore make_pivot_score(const std::vector<int>& ranks, const std::vector<int>& scores) {
  return {-mean_of(ranks), mean_of(scores)};
}

PivotScore average_pivot_scores(const PivotScore& a, const PivotScore& b) {
  return {(a.neg_mean_rank + b.neg_mean_rank) / 2.0, (a.mean_score + b.mean_score) / 2.0};
}

int compare_sort_keys(const SortKey& a, const SortKey& b) {
  auto desc = [](double x, double y) { return x > y ? -1 : (x < y ? 1 : 0); };
  if (int c = desc(a.pivot_score.neg_mean_rank, b.pivot_score.neg_mean_rank)) return c;
  if (int c = desc(a.pivot_score.mean_score, b.pivot_score.mean_score)) return c;
  if (int c = desc(a.llm_score, b.llm_score)) return c;
  return desc(a.bootstrap, b.bootstrap);
}

RankingTask make_ranking_task(Query query,
                              std::vector<std::pair<DocumentRecord, double>> scored_docs) {
  std::stable_sort(scored_docs.begin(), scored_docs.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  RankingTask task;
  task.query = std::move(query);
  task.candidates.reserve(scored_docs.size());
  for (auto& [doc, score] : scored_docs) {
    Candidate c;
    c.doc = std::move(doc);
    c.bootstrap_score = score;
    task.candidates.push_back(std::move(c));
  }
  return task;
}

void AlgorithmParams::validate() const {
  if (window < 2) throw ConfigError("window must be at least 2");
  if (overlap <= 0 || overlap >= window) throw ConfigError("overlap must satisfy 0 < overlap < window");
  if (num_pivots <= 0 || num_pivots >= window)
    throw ConfigError("num_pivots must satisfy 0 < num_pivots < window");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (thresholds[i] <= 0) throw ConfigError("telescope thresholds must be positive");
    if (i > 0 && thresholds[i] >= thresholds[i - 1])
      throw ConfigError("telescope thresholds must be strictly decreasing");
  }
}

int final_label(const std::vector<int>& scores) {
  if (scores.empty()) return 0;
  return round_half_up(mean_of(scores));
}

std::vector<std::size_t> select_pivots(const std::vector<Candidate>& candidates,
                                       std::size_t prefix, int num_pivots) {
  prefix = std::min(prefix, candidates.size());
  std::vector<std::size_t> all(prefix);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (static_cast<std::size_t>(num_pivots) >= prefix) return all;

  std::vector<std::size_t> ascending = all;
  std::sort(ascending.begin(), ascending.end(), [&](std::size_t a, std::size_t b) {
    if (candidates[a].bootstrap_score != candidates[b].bootstrap_score)
      return candidates[a].bootstrap_score < candidates[b].bootstrap_score;
    return candidates[a].doc.doc_id < candidates[b].doc.doc_id;
  });

  std::vector<bool> picked(prefix, false);
  std::size_t picked_count = 0;
  for (int k = 1; k <= num_pivots; ++k) {
    // Order statistic at quantile (k - 0.5) / num_pivots, computed in integer
    // arithmetic: ceil((2k - 1) * prefix / (2 * num_pivots)).
    std::size_t pos = (static_cast<std::size_t>(2 * k - 1) * prefix +
                       static_cast<std::size_t>(2 * num_pivots) - 1) /
                          static_cast<std::size_t>(2 * num_pivots) -
                      1;
    double target = candidates[ascending[pos]].bootstrap_score;
    std::size_t best = prefix;
    for (std::size_t i = 0; i < prefix; ++i) {
      if (best == prefix) {
        best = i;
        continue;
      }
      double di = std::fabs(candidates[i].bootstrap_score - target);
      double db = std::fabs(candidates[best].bootstrap_score - target);
      if (di != db) {
        if (di < db) best = i;
        continue;
      }
      if (candidates[i].bootstrap_score != candidates[best].bootstrap_score) {
        if (candidates[i].bootstrap_score > candidates[best].bootstrap_score) best = i;
        continue;
      }
      if (candidates[i].doc.doc_id < candidates[best].doc.doc_id) best = i;
    }
    if (!picked[best]) {
      picked[best] = true;
      ++picked_count;
    }
  }
  // Quantile collisions leave fewer than num_pivots distinct picks; top up
  // with the highest unpicked scores.
  while (picked_count < static_cast<std::size_t>(num_pivots)) {
    std::size_t best = prefix;
    for (std::size_t i = 0; i < prefix; ++i) {
      if (picked[i]) continue;
      if (best == prefix) {
        best = i;
        continue;
      }
      if (candidates[i].bootstrap_score != candidates[best].bootstrap_score) {
        if (candidates[i].bootstrap_score > candidates[best].bootstrap_score) best = i;
        continue;
      }
      if (candidates[i].doc.doc_id < candidates[best].doc.doc_id) best = i;
    }
    picked[best] = true;
    ++picked_count;
  }
  std::vector<std::size_t> result;
  result.reserve(static_cast<std::size_t>(num_pivots));
  for (std::size_t i = 0; i < prefix; ++i)
    if (picked[i]) result.push_back(i);
  return result;
}

std::vector<int> bubble_window_starts(int threshold, int window, int overlap) {
  if (window >= threshold) return {0};
  std::vector<int> starts;
  int step = window - overlap;
  for (int s = threshold - window;; s -= step) {
    if (s < 0) s = 0;
    starts.push_back(s);
    if (s == 0) break;
  }
  return starts;
}

namespace {

// Telescoping schedule: the full list first, then every configured threshold
// that actually truncates it.
std::vector<int> telescope_passes(int n, const std::vector<int>& thresholds) {
  std::vector<int> passes{n};
  for (int t : thresholds)
    if (t < n) passes.push_back(t);
  return passes;
}

JudgeRequest make_listwise_request(const Query& query, const std::vector<Candidate*>& window,
                                   JudgeMode mode, const RelevanceScale* scale) {
  std::vector<const DocumentRecord*> docs;
  docs.reserve(window.size());
  for (const Candidate* c : window) docs.push_back(&c->doc);
  auto [prompt, aliases] = render_listwise_prompt(query, docs, mode, scale);
  JudgeRequest request;
  request.mode = mode;
  request.system_prompt = system_prompt_for(mode);
  request.user_prompt = std::move(prompt);
  request.scale_max = scale ? scale->max_points() : 0;
  request.query_id = query.query_id;
  request.doc_ids = aliases.doc_ids();
  request.aliases = std::move(aliases);
  return request;
}

void finalize_labels(RankOutcome& out) {
  out.labels.reserve(out.ranked.size());
  for (const Candidate& c : out.ranked) out.labels.push_back(final_label(c.all_scores));
}

}  // namespace

RankOutcome pointwise_rank(const RankingTask& task, JudgeClient& judge,
                           const RelevanceScale& scale, bool include_title, int max_workers) {
  if (task.candidates.empty()) throw ConfigError("pointwise_rank needs at least one candidate");
  RankOutcome out;
  out.ranked = task.candidates;
  const std::size_t n = out.ranked.size();
  std::vector<int> scores(n, 0);
  std::vector<char> fellback(n, 0);
  parallel_for(n, max_workers, [&](std::size_t i) {
    const Candidate& c = out.ranked[i];
    JudgeRequest request;
    request.mode = JudgeMode::pointwise;
    request.system_prompt = system_prompt_for(request.mode);
    request.user_prompt = render_pointwise_prompt(task.query, c.doc, scale, include_title);
    request.scale_max = scale.max_points();
    request.query_id = task.query.query_id;
    request.doc_ids = {c.doc.doc_id};
    JudgeResponse response = judge.call(request);
    scores[i] = response.score;
    fellback[i] = response.fallback ? 1 : 0;
  });
  for (std::size_t i = 0; i < n; ++i) {
    out.ranked[i].llm_scores = {scores[i]};
    out.ranked[i].all_scores = {scores[i]};
    out.judge_calls += 1;
    out.fallback_calls += fellback[i];
  }
  std::stable_sort(out.ranked.begin(), out.ranked.end(), [](const Candidate& a, const Candidate& b) {
    if (a.all_scores[0] != b.all_scores[0]) return a.all_scores[0] > b.all_scores[0];
    if (a.bootstrap_score != b.bootstrap_score) return a.bootstrap_score > b.bootstrap_score;
    return a.doc.doc_id < b.doc.doc_id;
  });
  finalize_labels(out);
  return out;
}

RankOutcome bubble_rank(const RankingTask& task, JudgeClient& judge, const AlgorithmParams& params,
                        JudgeMode mode, const RelevanceScale* scale) {
  params.validate();
  if (task.candidates.empty()) throw ConfigError("bubble_rank needs at least one candidate");
  if (mode == JudgeMode::pointwise) throw ConfigError("bubble_rank needs a listwise mode");
  if (mode == JudgeMode::rank_and_score && scale == nullptr)
    throw ConfigError("rank_and_score requires a relevance scale");

  RankOutcome out;
  std::vector<Candidate> cands = task.candidates;
  const int n = static_cast<int>(cands.size());

  for (int threshold : telescope_passes(n, params.thresholds)) {
    for (int start : bubble_window_starts(threshold, params.window, params.overlap)) {
      int end = std::min(start + params.window, threshold);
      std::vector<Candidate*> window;
      window.reserve(static_cast<std::size_t>(end - start));
      for (int i = start; i < end; ++i) window.push_back(&cands[static_cast<std::size_t>(i)]);

      JudgeRequest request = make_listwise_request(task.query, window, mode, scale);
      JudgeResponse response = judge.call(request);
      ++out.judge_calls;
      if (response.fallback) ++out.fallback_calls;

      for (const RankedDoc& rd : response.ranking) {
        Candidate& c = cands[static_cast<std::size_t>(start + rd.alias - 1)];
        c.llm_scores.push_back(rd.score);
        c.all_scores.push_back(rd.score);
      }
      // Reorder the window in place by the returned ranks.
      std::vector<Candidate> reordered;
      reordered.reserve(response.ranking.size());
      for (const RankedDoc& rd : response.ranking)
        reordered.push_back(std::move(cands[static_cast<std::size_t>(start + rd.alias - 1)]));
      for (std::size_t i = 0; i < reordered.size(); ++i)
        cands[static_cast<std::size_t>(start) + i] = std::move(reordered[i]);
    }
  }
  out.ranked = std::move(cands);
  finalize_labels(out);
  return out;
}

RankOutcome quicksort_rank(const RankingTask& task, JudgeClient& judge,
                           const AlgorithmParams& params, JudgeMode mode,
                           const RelevanceScale* scale, int max_workers) {
  params.validate();
  if (task.candidates.empty()) throw ConfigError("quicksort_rank needs at least one candidate");
  if (mode == JudgeMode::pointwise) throw ConfigError("quicksort_rank needs a listwise mode");
  if (mode == JudgeMode::rank_and_score && scale == nullptr)
    throw ConfigError("rank_and_score requires a relevance scale");

  RankOutcome out;
  std::vector<Candidate> cands = task.candidates;
  const int n = static_cast<int>(cands.size());
  auto passes = telescope_passes(n, params.thresholds);

  for (std::size_t pass_idx = 0; pass_idx < passes.size(); ++pass_idx) {
    const std::size_t prefix = static_cast<std::size_t>(passes[pass_idx]);
    for (std::size_t i = 0; i < prefix; ++i) {
      cands[i].llm_ranks.clear();
      cands[i].llm_scores.clear();
      cands[i].left_pivot = -1;
      cands[i].right_pivot = -1;
      cands[i].sort_key.reset();
    }

    std::vector<std::size_t> pivots = select_pivots(cands, prefix, params.num_pivots);
    std::vector<bool> is_pivot(prefix, false);
    for (std::size_t p : pivots) is_pivot[p] = true;

    std::vector<std::size_t> nonpivots;
    nonpivots.reserve(prefix - pivots.size());
    for (std::size_t i = 0; i < prefix; ++i)
      if (!is_pivot[i]) nonpivots.push_back(i);

    Rng rng(mix_seed(params.seed, 0x71C5 + pass_idx));
    shuffle_in_place(nonpivots, rng);

    const std::size_t batch_cap = static_cast<std::size_t>(params.window - params.num_pivots);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t at = 0; at < nonpivots.size(); at += batch_cap)
      batches.emplace_back(nonpivots.begin() + static_cast<std::ptrdiff_t>(at),
                           nonpivots.begin() +
                               static_cast<std::ptrdiff_t>(std::min(at + batch_cap, nonpivots.size())));
    if (batches.empty()) batches.emplace_back();  // pivots-only batch

    struct BatchOutcome {
      std::vector<std::pair<std::size_t, RankedDoc>> ordered;  // judged order
      bool fallback = false;
    };
    std::vector<BatchOutcome> results(batches.size());

    parallel_for(batches.size(), max_workers, [&](std::size_t b) {
      std::vector<std::size_t> members = pivots;
      members.insert(members.end(), batches[b].begin(), batches[b].end());
      std::vector<Candidate*> group;
      group.reserve(members.size());
      for (std::size_t m : members) group.push_back(&cands[m]);
      JudgeRequest request = make_listwise_request(task.query, group, mode, scale);
      JudgeResponse response = judge.call(request);
      BatchOutcome& bo = results[b];
      bo.fallback = response.fallback;
      bo.ordered.reserve(response.ranking.size());
      for (const RankedDoc& rd : response.ranking)
        bo.ordered.emplace_back(members[static_cast<std::size_t>(rd.alias) - 1], rd);
    });

    out.judge_calls += static_cast<int>(batches.size());
    for (const BatchOutcome& bo : results) {
      if (bo.fallback) ++out.fallback_calls;
      for (const auto& [ci, rd] : bo.ordered) {
        cands[ci].llm_ranks.push_back(rd.rank);
        cands[ci].llm_scores.push_back(rd.score);
        cands[ci].all_scores.push_back(rd.score);
      }
      // Adjacent pivots in the judged batch order; a missing side stays -1
      // and is duplicated from the other side below.
      std::size_t last_pivot = prefix;
      for (const auto& [ci, rd] : bo.ordered) {
        if (is_pivot[ci])
          last_pivot = ci;
        else if (last_pivot != prefix)
          cands[ci].left_pivot = static_cast<int>(last_pivot);
      }
      last_pivot = prefix;
      for (auto it = bo.ordered.rbegin(); it != bo.ordered.rend(); ++it) {
        std::size_t ci = it->first;
        if (is_pivot[ci])
          last_pivot = ci;
        else if (last_pivot != prefix)
          cands[ci].right_pivot = static_cast<int>(last_pivot);
      }
    }

    std::vector<PivotScore> pivot_scores(prefix);
    for (std::size_t p : pivots) {
      pivot_scores[p] = make_pivot_score(cands[p].llm_ranks, cands[p].llm_scores);
      cands[p].left_pivot = static_cast<int>(p);  // a pivot is its own neighbor
      cands[p].right_pivot = static_cast<int>(p);
    }

    std::vector<double> pass_score(prefix, 0.0);
    for (std::size_t i = 0; i < prefix; ++i) pass_score[i] = mean_of(cands[i].llm_scores);

    if (mode == JudgeMode::rank_and_score) {
      // Judged scores replace the bootstrap prior for later passes and ties.
      for (std::size_t i = 0; i < prefix; ++i) cands[i].bootstrap_score = pass_score[i];
    }

    for (std::size_t i = 0; i < prefix; ++i) {
      int left = cands[i].left_pivot;
      int right = cands[i].right_pivot;
      if (left < 0) left = right;
      if (right < 0) right = left;
      // Every batch contains the pivots, so at least one side is set.
      PivotScore s = left >= 0
                         ? average_pivot_scores(pivot_scores[static_cast<std::size_t>(left)],
                                                pivot_scores[static_cast<std::size_t>(right)])
                         : PivotScore{};
      cands[i].sort_key = SortKey{s, pass_score[i], cands[i].bootstrap_score};
    }

    std::stable_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(prefix),
                     [](const Candidate& a, const Candidate& b) {
                       return compare_sort_keys(*a.sort_key, *b.sort_key) < 0;
                     });
  }

  out.ranked = std::move(cands);
  finalize_labels(out);
  return out;
}

}  // namespace llmrank
