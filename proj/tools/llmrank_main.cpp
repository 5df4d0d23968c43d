#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "llmrank/budget.hpp"
#include "llmrank/errors.hpp"
#include "llmrank/experiment.hpp"
#include "llmrank/util.hpp"

namespace {

using namespace llmrank;

// Overrides mutate the config JSON before it is interpreted, so every config
// field (including nested judge.* fields and arrays) can be set from the
// command line: --set method=quick --set judge.noise_rate=0.2
// --set thresholds=[50,20]
int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides) {
  nlohmann::json doc = nlohmann::json::parse(read_file(config_path));
  for (const std::string& ov : overrides) {
    auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw llmrank::ConfigError("override must look like key=value: " + ov);
    std::string key = ov.substr(0, eq);
    std::string raw = ov.substr(eq + 1);
    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;  // bare words are strings
    nlohmann::json* node = &doc;
    std::size_t pos = 0;
    for (std::size_t dot = key.find('.'); dot != std::string::npos;
         pos = dot + 1, dot = key.find('.', pos))
      node = &(*node)[key.substr(pos, dot - pos)];
    (*node)[key.substr(pos)] = std::move(value);
  }
  ExperimentConfig config = config_from_json(doc.dump());
  ExperimentResult result = run_experiment(config);
  std::cout << result.summary_text;
  return 0;
}

int cmd_budget(const std::string& method_name_str, BudgetParams params, const std::string& json_out) {
  Method method = method_from_name(method_name_str);
  TokenEstimate estimate = formula_estimate(method, params);
  BudgetReport report;
  report.method = method_name(method);
  report.input_tokens_formula = estimate.input_tokens;
  report.output_tokens_formula = estimate.output_tokens;
  report.api_calls = analytic_call_count(method, params);
  report.max_parallelism = parallelism_degree(method, params);

  std::cout << "method: " << report.method << "\n";
  std::cout << "input tokens (formula): " << format_double(report.input_tokens_formula) << "\n";
  std::cout << "output tokens (formula): " << format_double(report.output_tokens_formula) << "\n";
  std::cout << "api calls: " << report.api_calls << "\n";
  std::cout << "max parallelism: " << report.max_parallelism << "\n";
  if (method != Method::pointwise) {
    int reuse = method == Method::bubble ? params.overlap : params.num_pivots;
    double exact = 1.0;
    for (int t : params.thresholds)
      exact += static_cast<double>(t - reuse) / static_cast<double>(params.num_docs - reuse);
    std::cout << "telescoping multiplier: exact " << format_double(exact)
              << ", text approximation " << format_double(text_multiplier(params)) << "\n";
  }
  if (!json_out.empty()) {
    write_file_atomic(json_out, report.to_json() + "\n");
    std::cout << "wrote " << json_out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LLM reranking engine and evaluation harness"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Execute a ranking experiment from a JSON config");
  std::string config_path;
  std::vector<std::string> overrides;
  run->add_option("-c,--config", config_path, "Experiment config JSON")->required();
  run->add_option("--set", overrides, "Override a config field, e.g. --set method=quick");

  // compare
  auto* compare = app.add_subcommand("compare", "Bootstrap comparison of two run directories");
  std::string dir_a, dir_b, metric = "ndcg@10", compare_out;
  int replicates = 1000;
  double alpha = 0.05;
  uint64_t compare_seed = 0;
  compare->add_option("--run-a", dir_a, "Output directory of run A")->required();
  compare->add_option("--run-b", dir_b, "Output directory of run B")->required();
  compare->add_option("--metric", metric, "Metric name, e.g. ndcg@10");
  compare->add_option("-B,--replicates", replicates, "Bootstrap replicates");
  compare->add_option("--alpha", alpha, "Interval level (default 0.05 for 95% CI)");
  compare->add_option("--seed", compare_seed, "Bootstrap seed");
  compare->add_option("-o,--out", compare_out, "Directory for the comparison CSV and summary");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a deterministic synthetic dataset");
  llmrank::SynthSpec spec;
  std::string synth_out = "synth";
  synth->add_option("-o,--out", synth_out, "Output directory");
  synth->add_option("--queries", spec.num_queries, "Number of queries");
  synth->add_option("--docs", spec.docs_per_query, "Documents per query");
  synth->add_option("--relevant", spec.relevant_per_query, "Relevant documents per query");
  synth->add_option("--max-grade", spec.max_grade, "Maximum relevance grade");
  synth->add_option("--seed", spec.seed, "Generator seed");

  // budget
  auto* budget = app.add_subcommand("budget", "Analytic token and parallelism estimates");
  std::string budget_method = "quick", budget_json;
  llmrank::BudgetParams params;
  budget->add_option("--method", budget_method, "pointwise | bubble | quick");
  budget->add_option("--n", params.num_docs, "Documents per query");
  budget->add_option("--window", params.window, "Listwise batch size");
  budget->add_option("--overlap", params.overlap, "Sliding window overlap");
  budget->add_option("--pivots", params.num_pivots, "Number of pivots");
  budget->add_option("--thresholds", params.thresholds, "Telescope thresholds");
  budget->add_option("--doc-tokens", params.avg_doc_tokens, "Average tokens per document (L)");
  budget->add_option("--output-tokens-per-doc", params.output_tokens_per_doc,
                     "Output tokens per document (c)");
  budget->add_option("--json", budget_json, "Write the budget report JSON here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, overrides);
    if (compare->parsed()) {
      auto result = llmrank::compare_runs(dir_a, dir_b, metric, replicates, alpha, compare_seed,
                                          compare_out);
      std::cout << result.summary_text;
      return 0;
    }
    if (synth->parsed()) {
      auto paths = llmrank::synth_dataset(spec, synth_out);
      std::cout << "wrote " << paths.queries << "\n"
                << "wrote " << paths.corpus << "\n"
                << "wrote " << paths.qrels << "\n"
                << "wrote " << paths.run << "\n";
      return 0;
    }
    if (budget->parsed()) return cmd_budget(budget_method, params, budget_json);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
