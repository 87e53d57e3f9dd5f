#pragma once

// BM25 over an in-memory inverted index, the HTTP seam for external
// retrievers, and TREC run files.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "zeqr/datamodel.hpp"
#include "zeqr/ingest.hpp"
#include "zeqr/reader.hpp"

namespace zeqr {

// Analyzer on top of the shared tokenizer. Both switches default off.
struct AnalyzerOptions {
  bool remove_stopwords = false;
  bool s_stemmer = false;  // Harman's plural stripper

  bool operator==(const AnalyzerOptions&) const = default;
};

std::vector<std::string> analyze(std::string_view text, const AnalyzerOptions& options = {});

struct Posting {
  std::uint32_t doc = 0;
  std::uint32_t tf = 0;

  bool operator==(const Posting&) const = default;
};

struct InvertedIndex {
  std::unordered_map<std::string, std::vector<Posting>> postings;  // sorted by doc
  std::vector<std::uint32_t> doc_lengths;
  std::vector<std::string> doc_ids;
  double avg_doc_length = 0.0;
  std::size_t num_docs = 0;
  AnalyzerOptions analyzer;

  std::size_t df(const std::string& term) const;
  bool operator==(const InvertedIndex&) const = default;
};

// Throws PreconditionError for an empty collection and for duplicate ids.
InvertedIndex build_index(const std::vector<Document>& collection,
                          const AnalyzerOptions& analyzer = {});

// Self-describing text artifact, first line "zeqr-index 1".
void write_index(const InvertedIndex& index, std::ostream& out);
void save_index(const InvertedIndex& index, const std::string& path);
InvertedIndex read_index(std::istream& in);
InvertedIndex load_index(const std::string& path);

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

struct RunResult {
  std::string query_id;
  std::vector<ScoredDoc> ranked;
  std::string tag = "zeqr";

  bool operator==(const RunResult&) const = default;
};

// Scores must be non-increasing, ids unique, and at most `depth` entries.
// Throws ProtocolError describing the first violation.
void validate(const RunResult& run, std::size_t depth);

// Robertson/Lucene BM25:
//   sum over query tokens of ln(1 + (N - df + 0.5)/(df + 0.5))
//     * tf (k1 + 1) / (tf + k1 (1 - b + b |d| / avgdl)).
// Repeated query tokens count once per occurrence. Only documents matching
// at least one term are ranked; ties go to the smaller doc id.
RunResult bm25_search(const InvertedIndex& index, std::string_view query, int k,
                      const Config& config, std::string query_id = {},
                      std::string tag = "zeqr");

// POST {endpoint}/search {"query", "k"} -> {"hits": [{"doc_id", "score"}]}.
// Transport failures raise RetrievalError; invalid rankings ProtocolError.
RunResult external_search(const std::string& endpoint, std::string_view query, int k,
                          std::string query_id = {}, std::string tag = "zeqr",
                          const RemoteOptions& options = {});

// TREC six-column run format: `query_id Q0 doc_id rank score tag`.
void write_run(const std::vector<RunResult>& results, std::ostream& out);
void write_run(const std::vector<RunResult>& results, const std::string& path);
// Groups lines by query id in first-appearance order, ordering each
// ranking by its rank column.
std::vector<RunResult> read_run(std::istream& in);
std::vector<RunResult> read_run(const std::string& path);

}  // namespace zeqr
