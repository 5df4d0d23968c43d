#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace llmrank {

struct BinarizationRule {
  int threshold = 1;  // grade >= threshold counts as relevant
};

bool binarize(int grade, const BinarizationRule& rule);

struct LabeledScore {
  std::string doc_id;
  double model_score = 0.0;  // judge label / max_points, in [0,1]
  bool relevant = false;
};

// NDCG@k with linear gains, 1/log2(i+1) discounts at 1-based positions, ideal
// gain from all judged documents sorted by grade. Documents absent from the
// grade map gain 0; an all-zero ideal yields 0.
double ndcg_at_k(const std::vector<std::string>& ranked_doc_ids,
                 const std::map<std::string, int>& grades, int k);

// Tie-aware AUROC: (concordant + 0.5 * tied) / (positives * negatives).
// Nullopt when either class is missing.
std::optional<double> auroc(const std::vector<LabeledScore>& samples);

// Average precision over thresholds at the distinct score values descending:
// sum of (recall step) * precision. Nullopt when there are no positives.
std::optional<double> auprc(const std::vector<LabeledScore>& samples);

}  // namespace llmrank
