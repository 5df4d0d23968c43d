#include "llmrank/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "llmrank/util.hpp"

namespace llmrank {

namespace {

double interpolated_percentile(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted.front();
  double h = q * static_cast<double>(sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

BootstrapResult bootstrap_mean(const PerQueryMetric& values, int replicates, double alpha,
                               uint64_t seed) {
  if (values.empty()) throw std::invalid_argument("bootstrap_mean needs at least one query");
  if (replicates < 1) throw std::invalid_argument("bootstrap_mean needs at least one replicate");

  std::vector<double> sample;
  sample.reserve(values.size());
  for (const auto& [qid, v] : values) sample.push_back(v);
  const std::size_t n = sample.size();

  double total = 0.0;
  for (double v : sample) total += v;

  std::vector<double> means(static_cast<std::size_t>(replicates));
  for (int b = 0; b < replicates; ++b) {
    Rng rng(mix_seed(seed, static_cast<uint64_t>(b)));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += sample[rng.next_below(n)];
    means[static_cast<std::size_t>(b)] = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());

  BootstrapResult result;
  result.point_estimate = total / static_cast<double>(n);
  result.ci_low = interpolated_percentile(means, alpha / 2.0);
  result.ci_high = interpolated_percentile(means, 1.0 - alpha / 2.0);
  result.replicates = replicates;
  result.alpha = alpha;
  result.seed = seed;
  return result;
}

PerQueryMetric paired_delta(const PerQueryMetric& a, const PerQueryMetric& b) {
  PerQueryMetric delta;
  for (const auto& [qid, va] : a) {
    auto it = b.find(qid);
    delta[qid] = va - (it == b.end() ? 0.0 : it->second);
  }
  for (const auto& [qid, vb] : b)
    if (!a.count(qid)) delta[qid] = -vb;
  return delta;
}

Significance significance_flag(const BootstrapResult& result) {
  if (result.ci_low > 0.0) return Significance::sig_positive;
  if (result.ci_high < 0.0) return Significance::sig_negative;
  return Significance::not_significant;
}

const char* significance_name(Significance s) {
  switch (s) {
    case Significance::sig_positive: return "sig_positive";
    case Significance::sig_negative: return "sig_negative";
    case Significance::not_significant: return "not_significant";
  }
  return "not_significant";
}

}  // namespace llmrank
