#include "llmrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace llmrank {

bool binarize(int grade, const BinarizationRule& rule) {
  return grade >= rule.threshold;
}

double ndcg_at_k(const std::vector<std::string>& ranked_doc_ids,
                 const std::map<std::string, int>& grades, int k) {
  double dcg = 0.0;
  std::size_t depth = std::min<std::size_t>(static_cast<std::size_t>(k), ranked_doc_ids.size());
  for (std::size_t i = 0; i < depth; ++i) {
    auto it = grades.find(ranked_doc_ids[i]);
    int gain = it == grades.end() ? 0 : it->second;
    if (gain > 0) dcg += gain / std::log2(static_cast<double>(i) + 2.0);
  }
  std::vector<int> ideal;
  ideal.reserve(grades.size());
  for (const auto& [doc, grade] : grades)
    if (grade > 0) ideal.push_back(grade);
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double idcg = 0.0;
  std::size_t ideal_depth = std::min<std::size_t>(static_cast<std::size_t>(k), ideal.size());
  for (std::size_t i = 0; i < ideal_depth; ++i)
    idcg += ideal[i] / std::log2(static_cast<double>(i) + 2.0);
  return idcg == 0.0 ? 0.0 : dcg / idcg;
}

std::optional<double> auroc(const std::vector<LabeledScore>& samples) {
  int64_t positives = 0;
  for (const auto& s : samples) positives += s.relevant ? 1 : 0;
  int64_t negatives = static_cast<int64_t>(samples.size()) - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return samples[a].model_score < samples[b].model_score;
  });

  // Doubled midranks keep the rank sum integral, so the returned value equals
  // exact pair counting: 2U = sum of doubled positive midranks - n+(n+ + 1).
  int64_t doubled_positive_ranks = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() &&
           samples[order[j]].model_score == samples[order[i]].model_score)
      ++j;
    int64_t doubled_midrank = static_cast<int64_t>(i + 1) + static_cast<int64_t>(j);
    for (std::size_t k = i; k < j; ++k)
      if (samples[order[k]].relevant) doubled_positive_ranks += doubled_midrank;
    i = j;
  }
  int64_t two_u = doubled_positive_ranks - positives * (positives + 1);
  return static_cast<double>(two_u) / static_cast<double>(2 * positives * negatives);
}

std::optional<double> auprc(const std::vector<LabeledScore>& samples) {
  int64_t positives = 0;
  for (const auto& s : samples) positives += s.relevant ? 1 : 0;
  if (positives == 0) return std::nullopt;

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return samples[a].model_score > samples[b].model_score;
  });

  double ap = 0.0;
  int64_t tp = 0, fp = 0, prev_tp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() &&
           samples[order[j]].model_score == samples[order[i]].model_score) {
      if (samples[order[j]].relevant)
        ++tp;
      else
        ++fp;
      ++j;
    }
    ap += static_cast<double>(tp - prev_tp) / static_cast<double>(positives) *
          (static_cast<double>(tp) / static_cast<double>(tp + fp));
    prev_tp = tp;
    i = j;
  }
  return ap;
}

}  // namespace llmrank
