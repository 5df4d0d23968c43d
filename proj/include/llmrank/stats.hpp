#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace llmrank {

// Per-query metric values m(q).
using PerQueryMetric = std::map<std::string, double>;

struct BootstrapResult {
  double point_estimate = 0.0;  // full-sample mean
  double ci_low = 0.0;
  double ci_high = 0.0;
  int replicates = 0;
  double alpha = 0.05;
  uint64_t seed = 0;
};

// Query-resampling bootstrap of the mean: each replicate is the mean of n
// draws with replacement; the interval is the (alpha/2, 1-alpha/2) empirical
// percentile pair with linear interpolation. Deterministic for a given seed,
// independent of evaluation order (per-replicate substreams).
BootstrapResult bootstrap_mean(const PerQueryMetric& values, int replicates = 1000,
                               double alpha = 0.05, uint64_t seed = 0);

// Per-query a(q) - b(q) over the union of query ids; queries missing from
// either side enter with value 0, mirroring the failed-query convention.
PerQueryMetric paired_delta(const PerQueryMetric& a, const PerQueryMetric& b);

enum class Significance { sig_positive, sig_negative, not_significant };
Significance significance_flag(const BootstrapResult& result);
const char* significance_name(Significance s);

}  // namespace llmrank
