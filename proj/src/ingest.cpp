#include "zeqr/ingest.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "zeqr/error.hpp"
#include "zeqr/text.hpp"

namespace zeqr {

using nlohmann::json;

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

std::string read_file(const std::string& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string id_text(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ParseError(where + ": expected a string or integer id");
}

}  // namespace

std::vector<Document> parse_collection(std::istream& in) {
  std::vector<Document> docs;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("contents") ||
        !obj["contents"].is_string())
      throw ParseError("expected {\"id\": ..., \"contents\": \"...\"}", lineno);
    Document d{id_text(obj["id"], "line " + std::to_string(lineno)),
               obj["contents"].get<std::string>()};
    if (text::trim(d.body).empty())
      throw ParseError("document " + d.doc_id + " has an empty body", lineno);
    if (!seen.insert(d.doc_id).second)
      throw ParseError("duplicate document id " + d.doc_id, lineno);
    docs.push_back(std::move(d));
  }
  return docs;
}

std::vector<Document> load_collection(const std::string& path) {
  auto in = open_input(path);
  return parse_collection(in);
}

std::vector<Session> parse_topics(std::string_view source,
                                  const std::vector<Document>* collection) {
  json root;
  try {
    root = json::parse(source);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid topic JSON: ") + e.what());
  }
  if (!root.is_array()) throw ParseError("topic file must be a JSON array of topics");

  std::unordered_map<std::string, const Document*> by_id;
  if (collection) {
    for (const auto& d : *collection) by_id.emplace(d.doc_id, &d);
  }

  std::vector<Session> sessions;
  for (std::size_t ti = 0; ti < root.size(); ++ti) {
    const json& topic = root[ti];
    const std::string where = "topic #" + std::to_string(ti + 1);
    if (!topic.is_object() || !topic.contains("number") || !topic.contains("turn") ||
        !topic["turn"].is_array())
      throw ParseError(where + ": expected an object with \"number\" and \"turn\" array");
    Session s;
    s.session_id = id_text(topic["number"], where);
    for (std::size_t ui = 0; ui < topic["turn"].size(); ++ui) {
      const json& tj = topic["turn"][ui];
      const std::string turn_where =
          "topic " + s.session_id + " turn #" + std::to_string(ui + 1);
      if (!tj.is_object() || !tj.contains("number") || !tj["number"].is_number_integer() ||
          !tj.contains("raw_utterance") || !tj["raw_utterance"].is_string())
        throw ParseError(turn_where + ": expected integer \"number\" and string \"raw_utterance\"");
      Turn t;
      t.turn_id = tj["number"].get<int>();
      t.raw_query = tj["raw_utterance"].get<std::string>();
      if (tj.contains("canonical_result_id") && !tj["canonical_result_id"].is_null())
        t.canonical_answer_id = id_text(tj["canonical_result_id"], turn_where);
      if (tj.contains("canonical_passage") && !tj["canonical_passage"].is_null()) {
        if (!tj["canonical_passage"].is_string())
          throw ParseError(turn_where + ": canonical_passage must be a string");
        t.canonical_answer = tj["canonical_passage"].get<std::string>();
      } else if (t.canonical_answer_id && collection) {
        auto it = by_id.find(*t.canonical_answer_id);
        if (it == by_id.end())
          throw ParseError(turn_where + ": canonical_result_id " + *t.canonical_answer_id +
                           " is not in the collection");
        t.canonical_answer = it->second->body;
      }
      s.turns.push_back(std::move(t));
    }
    try {
      validate(s);
    } catch (const PreconditionError& e) {
      throw ParseError(e.what());
    }
    sessions.push_back(std::move(s));
  }
  return sessions;
}

std::vector<Session> load_topics(const std::string& path,
                                 const std::vector<Document>* collection) {
  return parse_topics(read_file(path), collection);
}

std::string serialize_topics(const std::vector<Session>& sessions) {
  json root = json::array();
  for (const auto& s : sessions) {
    json turns = json::array();
    for (const auto& t : s.turns) {
      json tj = {{"number", t.turn_id}, {"raw_utterance", t.raw_query}};
      if (t.canonical_answer_id) tj["canonical_result_id"] = *t.canonical_answer_id;
      if (t.canonical_answer) tj["canonical_passage"] = *t.canonical_answer;
      turns.push_back(std::move(tj));
    }
    root.push_back({{"number", s.session_id}, {"turn", std::move(turns)}});
  }
  return root.dump(2);
}

void Qrels::set(const std::string& query_id, const std::string& doc_id, int grade) {
  if (grade < 0) throw PreconditionError("negative relevance grade");
  by_query_[query_id][doc_id] = grade;
}

int Qrels::grade(const std::string& query_id, const std::string& doc_id) const {
  auto q = by_query_.find(query_id);
  if (q == by_query_.end()) return 0;
  auto d = q->second.find(doc_id);
  return d == q->second.end() ? 0 : d->second;
}

bool Qrels::has_query(const std::string& query_id) const {
  return by_query_.count(query_id) != 0;
}

const std::map<std::string, int>& Qrels::judgments_for(const std::string& query_id) const {
  static const std::map<std::string, int> kEmpty;
  auto q = by_query_.find(query_id);
  return q == by_query_.end() ? kEmpty : q->second;
}

std::size_t Qrels::size() const {
  std::size_t n = 0;
  for (const auto& [q, docs] : by_query_) n += docs.size();
  return n;
}

Qrels parse_qrels(std::istream& in) {
  Qrels qrels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    std::istringstream fields(line);
    std::string qid, iter, doc, grade_text, extra;
    if (!(fields >> qid >> iter >> doc >> grade_text) || (fields >> extra))
      throw ParseError("expected 'query_id 0 doc_id grade'", lineno);
    long long grade = 0;
    try {
      grade = text::parse_int(grade_text);
    } catch (const ParseError&) {
      throw ParseError("grade '" + grade_text + "' is not an integer", lineno);
    }
    if (grade < 0) throw ParseError("negative grade " + grade_text, lineno);
    qrels.set(qid, doc, static_cast<int>(grade));
  }
  return qrels;
}

Qrels load_qrels(const std::string& path) {
  auto in = open_input(path);
  return parse_qrels(in);
}

double IdfTable::idf(std::string_view term) const {
  auto it = term_idf.find(text::to_lower(term));
  return it == term_idf.end() ? default_idf : it->second;
}

IdfTable build_idf_table(const std::vector<Document>& collection) {
  if (collection.empty()) throw PreconditionError("cannot build an IDF table from an empty collection");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : collection) {
    auto terms = text::normalize_terms(doc.body);
    std::set<std::string> unique(terms.begin(), terms.end());
    for (const auto& t : unique) ++df[t];
  }
  IdfTable table;
  table.num_docs = collection.size();
  const double n = static_cast<double>(table.num_docs);
  for (const auto& [term, count] : df) table.term_idf.emplace(term, std::log(n / count));
  table.default_idf = std::log(n / 0.5);
  return table;
}

void write_idf_table(const IdfTable& table, std::ostream& out) {
  out << "#docs=" << table.num_docs << '\n';
  for (const auto& [term, idf] : table.term_idf) out << term << '\t' << text::format_double(idf) << '\n';
}

void save_idf_table(const IdfTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_idf_table(table, out);
  if (!out) throw IoError("write failed: " + path);
}

IdfTable read_idf_table(std::istream& in) {
  IdfTable table;
  std::string line;
  if (!std::getline(in, line) || line.rfind("#docs=", 0) != 0)
    throw ParseError("missing '#docs=N' header", 1);
  long long n = text::parse_int(std::string_view(line).substr(6));
  if (n <= 0) throw ParseError("document count must be positive", 1);
  table.num_docs = static_cast<std::size_t>(n);
  table.default_idf = std::log(static_cast<double>(n) / 0.5);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected term<TAB>idf", lineno);
    double v = 0;
    try {
      v = text::parse_double(std::string_view(line).substr(tab + 1));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
    table.term_idf[line.substr(0, tab)] = v;
  }
  return table;
}

IdfTable load_idf_table(const std::string& path) {
  auto in = open_input(path);
  return read_idf_table(in);
}

}  // namespace zeqr
