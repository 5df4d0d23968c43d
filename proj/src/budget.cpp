#include "llmrank/budget.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace llmrank {

namespace {

constexpr double kTokenProxyFactor = 1.3;  // whitespace tokens to model tokens

// Effective full-list-equivalent judge calls across telescoping passes, as a
// single fraction: ((N - reuse) + sum_i (T_i - reuse)) / (W - reuse).
double telescoped_calls(const BudgetParams& p, int reuse) {
  double numer = static_cast<double>(p.num_docs - reuse);
  for (int t : p.thresholds) numer += static_cast<double>(t - reuse);
  return numer / static_cast<double>(p.window - reuse);
}

int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace

TokenEstimate formula_estimate(Method method, const BudgetParams& p) {
  if (method == Method::pointwise) {
    return {static_cast<double>(p.num_docs) * p.avg_doc_tokens, static_cast<double>(p.num_docs)};
  }
  int reuse = method == Method::bubble ? p.overlap : p.num_pivots;
  double calls = telescoped_calls(p, reuse);
  return {calls * p.window * p.avg_doc_tokens, calls * p.output_tokens_per_doc * p.window};
}

int parallelism_degree(Method method, const BudgetParams& p) {
  switch (method) {
    case Method::pointwise: return p.num_docs;
    case Method::bubble: return 1;
    case Method::quick: return ceil_div(p.num_docs - p.num_pivots, p.window - p.num_pivots);
  }
  return 1;
}

int analytic_call_count(Method method, const BudgetParams& p) {
  if (method == Method::pointwise) return p.num_docs;
  std::vector<int> passes{p.num_docs};
  for (int t : p.thresholds)
    if (t < p.num_docs) passes.push_back(t);
  int calls = 0;
  for (int t : passes) {
    if (method == Method::bubble) {
      calls += t <= p.window ? 1 : 1 + ceil_div(t - p.window, p.window - p.overlap);
    } else {
      calls += t <= p.num_pivots ? 1 : ceil_div(t - p.num_pivots, p.window - p.num_pivots);
    }
  }
  return calls;
}

double text_multiplier(const BudgetParams& p) {
  double m = 1.0;
  for (int t : p.thresholds) m += static_cast<double>(t) / static_cast<double>(p.num_docs);
  return m;
}

std::string BudgetReport::to_json() const {
  nlohmann::ordered_json j;
  j["method"] = method;
  j["input_tokens_formula"] = input_tokens_formula;
  j["output_tokens_formula"] = output_tokens_formula;
  j["input_tokens_measured"] = input_tokens_measured;
  j["output_tokens_measured"] = output_tokens_measured;
  j["api_calls"] = api_calls;
  j["max_parallelism"] = max_parallelism;
  return j.dump(2);
}

BudgetReport measured_report(Method method, const BudgetParams& params,
                             const JudgeInstrumentation& instrumentation) {
  BudgetReport report;
  report.method = method_name(method);
  TokenEstimate estimate = formula_estimate(method, params);
  report.input_tokens_formula = estimate.input_tokens;
  report.output_tokens_formula = estimate.output_tokens;
  report.input_tokens_measured = static_cast<int64_t>(
      std::llround(kTokenProxyFactor * static_cast<double>(instrumentation.input_ws_tokens.load())));
  report.output_tokens_measured = static_cast<int64_t>(
      std::llround(kTokenProxyFactor * static_cast<double>(instrumentation.output_ws_tokens.load())));
  report.api_calls = instrumentation.calls.load();
  report.max_parallelism = instrumentation.peak_in_flight.load();
  return report;
}

}  // namespace llmrank
