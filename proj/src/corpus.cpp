#include "llmrank/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "llmrank/errors.hpp"

namespace llmrank {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::optional<double> parse_real(std::string_view s) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// Calls fn(line_number, line) for every line, stripping a trailing '\r'.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    if (pos == text.size()) break;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    fn(line_no, line);
    pos = end + 1;
  }
}

}  // namespace

void Qrels::set(const std::string& query_id, const std::string& doc_id, int grade) {
  judgments_[query_id][doc_id] = grade;
}

int Qrels::grade(const std::string& query_id, const std::string& doc_id) const {
  auto q = judgments_.find(query_id);
  if (q == judgments_.end()) return 0;
  auto d = q->second.find(doc_id);
  return d == q->second.end() ? 0 : d->second;
}

const std::map<std::string, int>* Qrels::for_query(const std::string& query_id) const {
  auto q = judgments_.find(query_id);
  return q == judgments_.end() ? nullptr : &q->second;
}

int Qrels::max_grade() const {
  int best = 0;
  for (const auto& [qid, docs] : judgments_)
    for (const auto& [did, grade] : docs) best = std::max(best, grade);
  return best;
}

Qrels parse_qrels(std::string_view text) {
  Qrels qrels;
  for_each_line(text, [&](int line_no, std::string_view line) {
    auto fields = split_fields(line);
    if (fields.empty()) return;
    if (fields.size() < 4) throw ParseError("qrels line needs 4 whitespace-separated fields", line_no);
    auto grade = parse_int(fields[3]);
    if (!grade || *grade < 0) throw ParseError("qrels grade must be a non-negative integer", line_no);
    qrels.set(std::string(fields[0]), std::string(fields[2]), *grade);
  });
  return qrels;
}

std::string serialize_qrels(const Qrels& qrels) {
  std::string out;
  for (const auto& [qid, docs] : qrels.judgments())
    for (const auto& [did, grade] : docs)
      out += qid + " 0 " + did + " " + std::to_string(grade) + "\n";
  return out;
}

RunMap parse_run_file(std::string_view text) {
  struct Row {
    std::string doc_id;
    int rank;
    double score;
  };
  std::map<std::string, std::vector<Row>> rows;
  for_each_line(text, [&](int line_no, std::string_view line) {
    auto fields = split_fields(line);
    if (fields.empty()) return;
    if (fields.size() < 6) throw ParseError("run line needs 6 whitespace-separated fields", line_no);
    auto rank = parse_int(fields[3]);
    if (!rank) throw ParseError("run rank must be an integer", line_no);
    auto score = parse_real(fields[4]);
    if (!score) throw ParseError("run score must be a number", line_no);
    rows[std::string(fields[0])].push_back({std::string(fields[2]), *rank, *score});
  });
  RunMap run;
  for (auto& [qid, list] : rows) {
    std::stable_sort(list.begin(), list.end(), [](const Row& a, const Row& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.rank < b.rank;
    });
    auto& out = run[qid];
    out.reserve(list.size());
    for (auto& row : list) out.push_back({std::move(row.doc_id), row.score});
  }
  return run;
}

std::string truncate_words(std::string_view text, std::size_t max_words) {
  std::string out;
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < text.size() && count < max_words) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (count > 0) out += ' ';
    out.append(text.substr(start, i - start));
    ++count;
  }
  return out;
}

std::string write_run_file(const std::map<std::string, std::vector<std::string>>& rankings,
                           const std::string& tag) {
  std::string out;
  for (const auto& [qid, docs] : rankings) {
    std::size_t n = docs.size();
    for (std::size_t i = 0; i < n; ++i) {
      out += qid + " Q0 " + docs[i] + " " + std::to_string(i + 1) + " " +
             std::to_string(n - i) + " " + tag + "\n";
    }
  }
  return out;
}

}  // namespace llmrank
