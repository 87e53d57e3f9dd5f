#include "zeqr/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "http_client.hpp"
#include "zeqr/error.hpp"
#include "zeqr/text.hpp"

namespace zeqr {

namespace {

bool is_stopword(std::string_view term) {
  // Lucene's English stop set.
  static const std::set<std::string, std::less<>> words{
      "a",    "an",   "and",   "are",   "as",   "at",    "be",   "but",  "by",
      "for",  "if",   "in",    "into",  "is",   "it",    "no",   "not",  "of",
      "on",   "or",   "such",  "that",  "the",  "their", "then", "there", "these",
      "they", "this", "to",    "was",   "will", "with"};
  return words.count(term) != 0;
}

bool ends_with(const std::string& w, std::string_view suf) {
  return w.size() >= suf.size() && w.compare(w.size() - suf.size(), suf.size(), suf) == 0;
}

std::string s_stem(std::string w) {
  if (ends_with(w, "ies") && !ends_with(w, "eies") && !ends_with(w, "aies")) {
    w.replace(w.size() - 3, 3, "y");
  } else if (ends_with(w, "es") && !ends_with(w, "aes") && !ends_with(w, "ees") &&
             !ends_with(w, "oes")) {
    w.pop_back();
  } else if (ends_with(w, "s") && !ends_with(w, "us") && !ends_with(w, "ss")) {
    w.pop_back();
  }
  return w;
}

}  // namespace

std::vector<std::string> analyze(std::string_view text, const AnalyzerOptions& options) {
  auto terms = text::normalize_terms(text);
  if (!options.remove_stopwords && !options.s_stemmer) return terms;
  std::vector<std::string> out;
  out.reserve(terms.size());
  for (auto& t : terms) {
    if (options.remove_stopwords && is_stopword(t)) continue;
    out.push_back(options.s_stemmer ? s_stem(std::move(t)) : std::move(t));
  }
  return out;
}

std::size_t InvertedIndex::df(const std::string& term) const {
  auto it = postings.find(term);
  return it == postings.end() ? 0 : it->second.size();
}

InvertedIndex build_index(const std::vector<Document>& collection, const AnalyzerOptions& analyzer) {
  if (collection.empty()) throw PreconditionError("cannot index an empty collection");
  InvertedIndex index;
  index.analyzer = analyzer;
  index.num_docs = collection.size();
  std::set<std::string> seen;
  std::uint64_t total = 0;
  for (std::uint32_t d = 0; d < collection.size(); ++d) {
    const auto& doc = collection[d];
    if (!seen.insert(doc.doc_id).second) throw PreconditionError("duplicate doc_id " + doc.doc_id);
    if (doc.doc_id.find_first_of(" \t\r\n") != std::string::npos || doc.doc_id.empty())
      throw PreconditionError("doc_id '" + doc.doc_id + "' must be non-empty without whitespace");
    std::map<std::string, std::uint32_t> tf;
    auto terms = analyze(doc.body, analyzer);
    for (auto& t : terms) ++tf[std::move(t)];
    for (const auto& [term, count] : tf) index.postings[term].push_back({d, count});
    index.doc_ids.push_back(doc.doc_id);
    index.doc_lengths.push_back(static_cast<std::uint32_t>(terms.size()));
    total += terms.size();
  }
  index.avg_doc_length = static_cast<double>(total) / static_cast<double>(index.num_docs);
  return index;
}

void write_index(const InvertedIndex& index, std::ostream& out) {
  out << "zeqr-index 1\n";
  out << "analyzer stopwords=" << index.analyzer.remove_stopwords
      << " s_stemmer=" << index.analyzer.s_stemmer << '\n';
  out << "docs " << index.num_docs << '\n';
  for (std::size_t d = 0; d < index.num_docs; ++d)
    out << index.doc_ids[d] << '\t' << index.doc_lengths[d] << '\n';
  std::vector<const std::string*> terms;
  terms.reserve(index.postings.size());
  for (const auto& [term, _] : index.postings) terms.push_back(&term);
  std::sort(terms.begin(), terms.end(), [](auto* a, auto* b) { return *a < *b; });
  out << "terms " << terms.size() << '\n';
  for (const auto* term : terms) {
    out << *term << '\t';
    bool first = true;
    for (const auto& p : index.postings.at(*term)) {
      if (!first) out << ' ';
      out << p.doc << ':' << p.tf;
      first = false;
    }
    out << '\n';
  }
}

void save_index(const InvertedIndex& index, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_index(index, out);
  if (!out) throw IoError("write failed: " + path);
}

InvertedIndex read_index(std::istream& in) {
  InvertedIndex index;
  std::string line;
  std::size_t lineno = 0;
  auto next = [&](const char* what) -> std::string& {
    if (!std::getline(in, line)) throw ParseError(std::string("index truncated before ") + what, lineno + 1);
    ++lineno;
    return line;
  };
  if (next("header") != "zeqr-index 1") throw ParseError("not a zeqr-index v1 file", 1);
  {
    int stop = 0, stem = 0;
    if (std::sscanf(next("analyzer").c_str(), "analyzer stopwords=%d s_stemmer=%d", &stop, &stem) != 2)
      throw ParseError("bad analyzer line", lineno);
    index.analyzer = {stop != 0, stem != 0};
  }
  std::istringstream docs_line(next("docs"));
  std::string word;
  if (!(docs_line >> word >> index.num_docs) || word != "docs" || index.num_docs == 0)
    throw ParseError("bad docs line", lineno);
  std::uint64_t total = 0;
  for (std::size_t d = 0; d < index.num_docs; ++d) {
    const auto& l = next("document table");
    auto tab = l.find('\t');
    if (tab == std::string::npos) throw ParseError("expected doc_id<TAB>length", lineno);
    index.doc_ids.push_back(l.substr(0, tab));
    auto len = text::parse_int(std::string_view(l).substr(tab + 1));
    index.doc_lengths.push_back(static_cast<std::uint32_t>(len));
    total += static_cast<std::uint64_t>(len);
  }
  index.avg_doc_length = static_cast<double>(total) / static_cast<double>(index.num_docs);
  std::istringstream terms_line(next("terms"));
  std::size_t num_terms = 0;
  if (!(terms_line >> word >> num_terms) || word != "terms") throw ParseError("bad terms line", lineno);
  for (std::size_t t = 0; t < num_terms; ++t) {
    const auto& l = next("postings");
    auto tab = l.find('\t');
    if (tab == std::string::npos) throw ParseError("expected term<TAB>postings", lineno);
    auto& list = index.postings[l.substr(0, tab)];
    std::istringstream ps(l.substr(tab + 1));
    std::string entry;
    while (ps >> entry) {
      auto colon = entry.find(':');
      if (colon == std::string::npos) throw ParseError("bad posting '" + entry + "'", lineno);
      auto doc = text::parse_int(std::string_view(entry).substr(0, colon));
      auto tf = text::parse_int(std::string_view(entry).substr(colon + 1));
      if (doc < 0 || static_cast<std::size_t>(doc) >= index.num_docs || tf <= 0)
        throw ParseError("posting out of range '" + entry + "'", lineno);
      list.push_back({static_cast<std::uint32_t>(doc), static_cast<std::uint32_t>(tf)});
    }
  }
  return index;
}

InvertedIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_index(in);
}

void validate(const RunResult& run, std::size_t depth) {
  if (run.ranked.size() > depth)
    throw ProtocolError("ranking for " + run.query_id + " has " + std::to_string(run.ranked.size()) +
                        " entries, more than the requested " + std::to_string(depth));
  std::set<std::string_view> ids;
  for (std::size_t i = 0; i < run.ranked.size(); ++i) {
    const auto& hit = run.ranked[i];
    if (!ids.insert(hit.doc_id).second)
      throw ProtocolError("ranking for " + run.query_id + " repeats doc " + hit.doc_id);
    if (i > 0 && hit.score > run.ranked[i - 1].score)
      throw ProtocolError("ranking for " + run.query_id + " has increasing scores at rank " +
                          std::to_string(i + 1));
    if (std::isnan(hit.score)) throw ProtocolError("ranking for " + run.query_id + " has a NaN score");
  }
}

RunResult bm25_search(const InvertedIndex& index, std::string_view query, int k, const Config& config,
                      std::string query_id, std::string tag) {
  if (k < 1) throw PreconditionError("search depth k must be >= 1");
  const double n = static_cast<double>(index.num_docs);
  const double k1 = config.bm25_k1;
  const double b = config.bm25_b;
  std::vector<double> scores(index.num_docs, 0.0);
  std::vector<char> touched(index.num_docs, 0);
  for (const auto& term : analyze(query, index.analyzer)) {
    auto it = index.postings.find(term);
    if (it == index.postings.end()) continue;
    const double df = static_cast<double>(it->second.size());
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    for (const auto& p : it->second) {
      const double tf = p.tf;
      const double norm = k1 * (1.0 - b + b * index.doc_lengths[p.doc] / index.avg_doc_length);
      scores[p.doc] += idf * tf * (k1 + 1.0) / (tf + norm);
      touched[p.doc] = 1;
    }
  }
  std::vector<std::uint32_t> hits;
  for (std::uint32_t d = 0; d < index.num_docs; ++d)
    if (touched[d]) hits.push_back(d);
  auto better = [&](std::uint32_t a, std::uint32_t c) {
    if (scores[a] != scores[c]) return scores[a] > scores[c];
    return index.doc_ids[a] < index.doc_ids[c];
  };
  const std::size_t depth = std::min<std::size_t>(hits.size(), static_cast<std::size_t>(k));
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(depth), hits.end(), better);
  RunResult run{std::move(query_id), {}, std::move(tag)};
  run.ranked.reserve(depth);
  for (std::size_t i = 0; i < depth; ++i) run.ranked.push_back({index.doc_ids[hits[i]], scores[hits[i]]});
  return run;
}

RunResult external_search(const std::string& endpoint, std::string_view query, int k,
                          std::string query_id, std::string tag, const RemoteOptions& options) {
  if (k < 1) throw PreconditionError("search depth k must be >= 1");
  nlohmann::json reply;
  try {
    reply = detail::post_json(endpoint, "/search", {{"query", std::string(query)}, {"k", k}},
                              {options.max_attempts, options.initial_backoff, options.timeout});
  } catch (const TransportError& e) {
    throw RetrievalError(std::string("external retriever failed: ") + e.what(), endpoint);
  }
  if (!reply.is_object() || !reply.contains("hits") || !reply["hits"].is_array())
    throw ProtocolError(endpoint + ": expected {\"hits\": [...]}");
  RunResult run{std::move(query_id), {}, std::move(tag)};
  for (const auto& hit : reply["hits"]) {
    if (!hit.is_object() || !hit.contains("doc_id") || !hit["doc_id"].is_string() ||
        !hit.contains("score") || !hit["score"].is_number())
      throw ProtocolError(endpoint + ": every hit needs doc_id and score");
    run.ranked.push_back({hit["doc_id"].get<std::string>(), hit["score"].get<double>()});
  }
  validate(run, static_cast<std::size_t>(k));
  return run;
}

void write_run(const std::vector<RunResult>& results, std::ostream& out) {
  for (const auto& run : results) {
    for (std::size_t i = 0; i < run.ranked.size(); ++i) {
      out << run.query_id << " Q0 " << run.ranked[i].doc_id << ' ' << (i + 1) << ' '
          << text::format_double(run.ranked[i].score) << ' ' << run.tag << '\n';
    }
  }
}

void write_run(const std::vector<RunResult>& results, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write run file " + path);
  write_run(results, out);
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

std::vector<RunResult> read_run(std::istream& in) {
  std::vector<RunResult> runs;
  std::map<std::string, std::size_t> slot;
  std::vector<std::vector<std::pair<long long, ScoredDoc>>> ranked;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    std::istringstream fields(line);
    std::string qid, q0, doc, rank_text, score_text, tag, extra;
    if (!(fields >> qid >> q0 >> doc >> rank_text >> score_text >> tag) || (fields >> extra))
      throw ParseError("expected 'query_id Q0 doc_id rank score tag'", lineno);
    long long rank = 0;
    double score = 0;
    try {
      rank = text::parse_int(rank_text);
      score = text::parse_double(score_text);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
    auto [it, inserted] = slot.emplace(qid, runs.size());
    if (inserted) {
      runs.push_back({qid, {}, tag});
      ranked.emplace_back();
    }
    ranked[it->second].push_back({rank, {doc, score}});
  }
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::stable_sort(ranked[i].begin(), ranked[i].end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [rank, hit] : ranked[i]) runs[i].ranked.push_back(std::move(hit));
  }
  return runs;
}

std::vector<RunResult> read_run(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open run file " + path);
  return read_run(in);
}

}  // namespace zeqr
