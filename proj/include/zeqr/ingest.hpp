#pragma once

// Loading topics, judgments and collections; the IDF table behind the
// omission gate.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zeqr/datamodel.hpp"

namespace zeqr {

struct Document {
  std::string doc_id;
  std::string body;
};

// Collection: JSON lines, one {"id": ..., "contents": ...} object per line.
std::vector<Document> load_collection(const std::string& path);
std::vector<Document> parse_collection(std::istream& in);

// Topics: a JSON array of
//   {"number": <id>, "turn": [{"number": n, "raw_utterance": "...",
//                              "canonical_result_id": "..."?,
//                              "canonical_passage": "..."?}, ...]}
// A canonical_result_id is resolved against `collection` when one is given
// (ParseError if the id is unknown); without a collection only the id is kept.
std::vector<Session> load_topics(const std::string& path,
                                 const std::vector<Document>* collection = nullptr);
std::vector<Session> parse_topics(std::string_view json,
                                  const std::vector<Document>* collection = nullptr);
std::string serialize_topics(const std::vector<Session>& sessions);

class Qrels {
 public:
  using Key = std::pair<std::string, std::string>;  // (query_id, doc_id)

  void set(const std::string& query_id, const std::string& doc_id, int grade);
  // Grade of a judged pair, 0 when unjudged.
  int grade(const std::string& query_id, const std::string& doc_id) const;
  bool has_query(const std::string& query_id) const;
  // Judged documents of one query, doc_id -> grade.
  const std::map<std::string, int>& judgments_for(const std::string& query_id) const;
  std::size_t size() const;
  bool empty() const { return by_query_.empty(); }
  const std::map<std::string, std::map<std::string, int>>& by_query() const {
    return by_query_;
  }

 private:
  std::map<std::string, std::map<std::string, int>> by_query_;
};

// TREC qrels: `query_id 0 doc_id grade` per line. Duplicates keep the last grade.
Qrels load_qrels(const std::string& path);
Qrels parse_qrels(std::istream& in);

struct IdfTable {
  std::map<std::string, double> term_idf;
  std::size_t num_docs = 0;
  double default_idf = 0.0;

  double idf(std::string_view term) const;
  bool operator==(const IdfTable&) const = default;
};

// idf(t) = ln(N / df(t)) over normalized terms; unseen terms get ln(N / 0.5).
IdfTable build_idf_table(const std::vector<Document>& collection);

// Cache format: "#docs=N" header, then sorted "term<TAB>idf" lines with
// round-trip precision.
void write_idf_table(const IdfTable& table, std::ostream& out);
void save_idf_table(const IdfTable& table, const std::string& path);
IdfTable read_idf_table(std::istream& in);
IdfTable load_idf_table(const std::string& path);

}  // namespace zeqr
