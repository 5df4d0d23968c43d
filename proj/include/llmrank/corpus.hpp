#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace llmrank {

struct Query {
  std::string query_id;
  std::string text;
};

struct DocumentRecord {
  std::string doc_id;
  std::optional<std::string> title;
  std::string body;
};

// Graded relevance judgments. Pairs absent from the map count as grade 0.
class Qrels {
 public:
  void set(const std::string& query_id, const std::string& doc_id, int grade);
  int grade(const std::string& query_id, const std::string& doc_id) const;
  const std::map<std::string, int>* for_query(const std::string& query_id) const;
  int max_grade() const;  // over all judgments, 0 when empty
  bool empty() const { return judgments_.empty(); }
  std::size_t num_queries() const { return judgments_.size(); }
  const std::map<std::string, std::map<std::string, int>>& judgments() const { return judgments_; }

 private:
  std::map<std::string, std::map<std::string, int>> judgments_;
};

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;
};

// Per-query candidate lists in retrieval-score order.
using RunMap = std::map<std::string, std::vector<ScoredDoc>>;

// TREC qrels: `qid iter docid grade`. Later duplicate (qid, docid) lines win.
Qrels parse_qrels(std::string_view text);

// `qid 0 docid grade` lines, queries and documents in sorted order.
std::string serialize_qrels(const Qrels& qrels);

// TREC run format `qid Q0 docid rank score tag`. Entries are re-sorted per
// query by decreasing score, ties broken by the rank field ascending.
RunMap parse_run_file(std::string_view text);

// First max_words whitespace-delimited words joined by single spaces.
std::string truncate_words(std::string_view text, std::size_t max_words);

// Emits `qid Q0 docid rank score tag` lines. The score is the synthetic value
// list_size - rank + 1 so the emitted ordering survives downstream score-based
// re-sorting; raw judge labels are written separately as a labels file.
std::string write_run_file(const std::map<std::string, std::vector<std::string>>& rankings,
                           const std::string& tag);

}  // namespace llmrank
