#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "llmrank/judge.hpp"
#include "llmrank/rankers.hpp"

namespace llmrank {

struct BudgetParams {
  int num_docs = 100;
  int window = 20;
  int overlap = 10;
  int num_pivots = 10;
  std::vector<int> thresholds = {50, 20};
  double avg_doc_tokens = 500.0;        // L
  double output_tokens_per_doc = 8.0;   // c
};

struct TokenEstimate {
  double input_tokens = 0.0;
  double output_tokens = 0.0;
};

// Analytic token usage. Pointwise: (N*L, N). Listwise:
// (1 + sum_i (T_i - r) / (N - r)) * (N - r)/(W - r) * W * L input tokens and
// the same multiplier times c*W output tokens, with r the window overlap for
// bubbling and the pivot count for the partition sort. Evaluated as
// ((N - r) + sum_i (T_i - r)) / (W - r) * W * L so integer-friendly parameter
// sets come out exact.
TokenEstimate formula_estimate(Method method, const BudgetParams& params);

// Maximum concurrent judge calls: N for pointwise, 1 for the serial bubbling
// passes, ceil((N - P) / (W - P)) for the first partition pass.
int parallelism_degree(Method method, const BudgetParams& params);

// Exact judge-call count from window/batch enumeration over all telescoping
// passes.
int analytic_call_count(Method method, const BudgetParams& params);

// The looser multiplier 1 + sum_i T_i / N quoted alongside the exact one.
double text_multiplier(const BudgetParams& params);

struct BudgetReport {
  std::string method;
  double input_tokens_formula = 0.0;
  double output_tokens_formula = 0.0;
  int64_t input_tokens_measured = 0;
  int64_t output_tokens_measured = 0;
  int64_t api_calls = 0;
  int max_parallelism = 0;

  std::string to_json() const;
};

// Combines the analytic estimate with instrumented counters from a completed
// run. Measured token counts are whitespace tokens times 1.3.
BudgetReport measured_report(Method method, const BudgetParams& params,
                             const JudgeInstrumentation& instrumentation);

}  // namespace llmrank
