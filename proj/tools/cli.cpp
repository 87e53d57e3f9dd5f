#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "zeqr/datamodel.hpp"
#include "zeqr/error.hpp"
#include "zeqr/evaluation.hpp"
#include "zeqr/ingest.hpp"
#include "zeqr/linguistics.hpp"
#include "zeqr/reader.hpp"
#include "zeqr/reformulator.hpp"
#include "zeqr/retrieval.hpp"
#include "zeqr/text.hpp"

namespace zeqr::cli {
namespace {

namespace fs = std::filesystem;

// Bad flags, files or config values. Maps to exit code 2.
struct UsageError : Error {
  using Error::Error;
};

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "idf_threshold", "premodifier_idf_threshold", "bm25_k1", "bm25_b", "reader_max_tokens",
      "min_answer_score", "mode", "map_relevance_cutoff", "omission_strictness", "collection",
      "topics", "qrels", "idf_cache", "index", "reader", "retriever", "depth", "pronouns", "tag",
      "stopwords", "s_stemmer"};
  return keys;
}

bool known_key(const std::string& key) {
  const auto& keys = config_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

std::string env_name(const std::string& key) {
  std::string out = "ZEQR_";
  for (char c : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

// `key = value` lines; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::map<std::string, std::string> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto body = text::trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key(text::trim(body.substr(0, eq)));
    if (!known_key(key))
      throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    values[key] = std::string(text::trim(body.substr(eq + 1)));
  }
  return values;
}

struct Settings {
  std::map<std::string, std::string> values;

  std::optional<std::string> get(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end() || it->second.empty()) return std::nullopt;
    return it->second;
  }
  std::string require(const std::string& key, const std::string& flag) const {
    auto v = get(key);
    if (!v) throw UsageError("missing --" + flag);
    return *v;
  }
  bool flag(const std::string& key) const {
    auto v = get(key);
    return v && (*v == "1" || *v == "true" || *v == "yes" || *v == "on");
  }
};

// Flags collected by CLI11 for one subcommand.
struct Invocation {
  std::map<std::string, std::string> flags;
  std::string config_path;
};

void add_config_flags(CLI::App* sub, Invocation& inv, std::initializer_list<const char*> keys) {
  sub->add_option("--config", inv.config_path, "key = value config file");
  for (const char* key : keys) {
    std::string name = std::string("--") + key;
    std::replace(name.begin(), name.end(), '_', '-');
    if (std::string(key) == "idf_cache") name += ",--idf";
    std::string k = key;
    if (k == "stopwords" || k == "s_stemmer") {
      sub->add_flag_function(name, [&inv, k](std::int64_t n) { inv.flags[k] = n > 0 ? "1" : "0"; },
                             "analyzer switch");
    } else {
      sub->add_option_function<std::string>(name, [&inv, k](const std::string& v) { inv.flags[k] = v; },
                                            "overrides config key " + k);
    }
  }
}

// Precedence: flags > ZEQR_* environment > config file > defaults.
Settings resolve(const Invocation& inv) {
  Settings s;
  std::string config_path = inv.config_path;
  if (config_path.empty()) {
    if (const char* env = std::getenv("ZEQR_CONFIG")) config_path = env;
  }
  if (!config_path.empty()) s.values = read_config_file(config_path);
  for (const auto& key : config_keys()) {
    if (const char* env = std::getenv(env_name(key).c_str())) s.values[key] = env;
  }
  for (const auto& [k, v] : inv.flags) s.values[k] = v;
  return s;
}

Config make_config(const Settings& s) {
  Config c;
  try {
    if (auto v = s.get("idf_threshold")) c.idf_threshold = text::parse_double(*v);
    if (auto v = s.get("premodifier_idf_threshold")) c.premodifier_idf_threshold = text::parse_double(*v);
    if (auto v = s.get("bm25_k1")) c.bm25_k1 = text::parse_double(*v);
    if (auto v = s.get("bm25_b")) c.bm25_b = text::parse_double(*v);
    if (auto v = s.get("reader_max_tokens")) c.reader_max_tokens = static_cast<int>(text::parse_int(*v));
    if (auto v = s.get("min_answer_score")) c.min_answer_score = text::parse_double(*v);
    if (auto v = s.get("mode")) c.mode = parse_mode(*v);
    if (auto v = s.get("map_relevance_cutoff")) c.map_relevance_cutoff = static_cast<int>(text::parse_int(*v));
    if (auto v = s.get("omission_strictness")) c.omission_strictness = parse_strictness(*v);
    c.validate();
  } catch (const Error& e) {
    throw UsageError(std::string("bad configuration: ") + e.what());
  }
  return c;
}

int depth_of(const Settings& s, int fallback) {
  auto v = s.get("depth");
  if (!v) return fallback;
  long long d = 0;
  try {
    d = text::parse_int(*v);
  } catch (const ParseError&) {
    throw UsageError("--depth must be an integer");
  }
  if (d < 1) throw UsageError("--depth must be >= 1");
  return static_cast<int>(d);
}

void echo_config(const Config& c, const Settings& s, std::ostream& err) {
  err << "# effective config:";
  err << " mode=" << to_string(c.mode) << " idf_threshold=" << text::format_double(c.idf_threshold)
      << " premodifier_idf_threshold=" << text::format_double(c.premodifier_idf_threshold)
      << " omission_strictness=" << to_string(c.omission_strictness)
      << " bm25_k1=" << text::format_double(c.bm25_k1) << " bm25_b=" << text::format_double(c.bm25_b)
      << " reader_max_tokens=" << c.reader_max_tokens
      << " min_answer_score=" << text::format_double(c.min_answer_score)
      << " map_relevance_cutoff=" << c.map_relevance_cutoff;
  for (const char* key : {"collection", "topics", "qrels", "index", "idf_cache", "reader", "retriever",
                          "depth", "pronouns", "tag"}) {
    if (auto v = s.get(key)) err << ' ' << key << '=' << *v;
  }
  err << '\n';
}

AnalyzerOptions analyzer_options(const Settings& s) {
  return {s.flag("stopwords"), s.flag("s_stemmer")};
}

Analyzer make_analyzer(const Settings& s) {
  Analyzer a;
  if (auto p = s.get("pronouns")) a.inventory = PronounInventory::load(*p);
  return a;
}

std::string index_file(const std::string& dir) { return (fs::path(dir) / "index.txt").string(); }
std::string idf_file(const std::string& dir) { return (fs::path(dir) / "idf.tsv").string(); }

// IDF source: explicit cache, then the index directory, then the collection.
IdfTable load_idf(const Settings& s, const std::vector<Document>* collection) {
  if (auto p = s.get("idf_cache")) return load_idf_table(*p);
  if (auto dir = s.get("index")) {
    if (fs::exists(idf_file(*dir))) return load_idf_table(idf_file(*dir));
  }
  if (collection && !collection->empty()) return build_idf_table(*collection);
  throw UsageError("no IDF source: pass --idf-cache, --index or --collection");
}

std::string snippet(const std::string& body, std::size_t width = 80) {
  std::string s = body.substr(0, width);
  std::replace(s.begin(), s.end(), '\n', ' ');
  return body.size() > width ? s + "..." : s;
}

// ---------------------------------------------------------------------------

int cmd_index(const Settings& s, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const auto collection_path = s.require("collection", "collection");
  if (!fs::exists(collection_path)) throw UsageError("collection not found: " + collection_path);
  const auto docs = load_collection(collection_path);
  if (docs.empty()) throw UsageError("collection is empty: " + collection_path);
  const auto index = build_index(docs, analyzer_options(s));
  const auto idf = build_idf_table(docs);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
  save_index(index, index_file(out_dir));
  save_idf_table(idf, idf_file(out_dir));
  out << "documents\t" << index.num_docs << '\n';
  out << "terms\t" << index.postings.size() << '\n';
  err << "# wrote " << index_file(out_dir) << " and " << idf_file(out_dir) << '\n';
  return kExitOk;
}

void print_trace(const ReformulationTrace& t, std::string_view qid, std::ostream& out) {
  if (!qid.empty()) out << "[" << qid << "] ";
  out << t.raw_query << "\n";
  out << "  mode   " << to_string(t.mode) << '\n';
  auto answer_text = [](const std::optional<SpanAnswer>& a) {
    return a ? "\"" + a->text + "\" (score " + text::format_double(a->score) + ")" : std::string("-");
  };
  for (const auto& step : t.coref_steps) {
    out << "  coref  " << step.pronoun.surface << (step.pronoun.is_possessive ? " (possessive)" : "")
        << " -> " << answer_text(step.answer) << (step.applied ? "" : "  [skipped: " + step.skip_reason + "]")
        << "\n         Q: " << step.question << '\n';
  }
  out << "  q*     " << t.q_star << '\n';
  for (const auto& step : t.omission_steps) {
    out << "  omit   " << step.candidate.surface << ' ' << step.preposition << " ("
        << to_string(step.candidate.kind) << ", idf " << text::format_double(step.candidate.idf)
        << ") -> " << answer_text(step.answer)
        << (step.applied ? "" : "  [skipped: " + step.skip_reason + "]") << "\n         Q: " << step.question
        << '\n';
  }
  out << "  q**    " << t.q_double_star << '\n';
}

struct SearchBackend {
  std::optional<InvertedIndex> index;
  std::string endpoint;

  RunResult search(std::string_view query, int k, const Config& c, const std::string& qid,
                   const std::string& tag) const {
    if (!endpoint.empty()) return external_search(endpoint, query, k, qid, tag);
    return bm25_search(*index, query, k, c, qid, tag);
  }
};

SearchBackend make_backend(const Settings& s, const std::vector<Document>* collection) {
  SearchBackend b;
  auto retriever = s.get("retriever").value_or("bm25");
  if (retriever != "bm25") {
    if (retriever.rfind("http://", 0) != 0)
      throw UsageError("--retriever must be bm25 or an http:// endpoint");
    b.endpoint = retriever;
    return b;
  }
  if (auto dir = s.get("index")) {
    b.index = load_index(index_file(*dir));
  } else if (collection && !collection->empty()) {
    b.index = build_index(*collection, analyzer_options(s));
  } else {
    throw UsageError("BM25 needs --index or --collection");
  }
  return b;
}

int cmd_run(const Settings& s, const std::string& run_out, const std::string& trace_out,
            std::ostream& out, std::ostream& err) {
  const Config config = make_config(s);
  echo_config(config, s, err);
  std::vector<Document> collection;
  if (auto p = s.get("collection")) collection = load_collection(*p);
  const auto sessions =
      load_topics(s.require("topics", "topics"), collection.empty() ? nullptr : &collection);
  const IdfTable idf = load_idf(s, &collection);
  const SearchBackend backend = make_backend(s, &collection);
  std::unique_ptr<Reader> reader;
  if (auto spec = s.get("reader")) {
    reader = make_reader(*spec);
  } else if (config.mode == Mode::passthrough) {
    reader = std::make_unique<EchoReader>();  // never consulted
  } else {
    throw UsageError("--reader is required unless --mode passthrough");
  }
  const Analyzer analyzer = make_analyzer(s);
  const int depth = depth_of(s, 1000);
  const std::string tag = s.get("tag").value_or(std::string("zeqr_") + std::string(to_string(config.mode)));

  std::vector<RunResult> results;
  std::ostringstream traces;
  std::size_t turns = 0, failed = 0;
  for (const auto& session : sessions) {
    for (const auto& turn : session.turns) {
      ++turns;
      const auto qid = query_id(session, turn);
      try {
        const auto ctx = context_for_turn(session, turn.turn_id, config);
        const auto trace = reformulate(turn, ctx, idf, *reader, config, analyzer);
        if (trace.has_errors()) {
          ++failed;
          err << "warning: " << qid << ": reader error, kept the original wording for that step\n";
        }
        traces << trace_to_json(trace, qid) << '\n';
        results.push_back(backend.search(trace.q_double_star, depth, config, qid, tag));
      } catch (const Error& e) {
        ++failed;
        err << "warning: " << qid << " failed: " << e.what() << '\n';
      }
    }
  }
  write_run(results, run_out);
  if (!trace_out.empty()) {
    std::ofstream tf(trace_out, std::ios::binary);
    if (!tf) throw IoError("cannot write trace file " + trace_out);
    tf << traces.str();
  }
  out << "turns\t" << turns << "\nfailed\t" << failed << "\nrun\t" << run_out << '\n';
  if (!trace_out.empty()) out << "traces\t" << trace_out << '\n';
  return turns > 0 && failed == turns ? kExitFailure : kExitOk;
}

int cmd_eval(const Settings& s, const std::vector<std::string>& run_paths, std::ostream& out,
             std::ostream& err) {
  const Config config = make_config(s);
  const Qrels qrels = load_qrels(s.require("qrels", "qrels"));
  if (run_paths.empty() || run_paths.size() > 2) throw UsageError("pass one or two --run files");
  std::vector<MetricReport> reports;
  for (const auto& path : run_paths) {
    reports.push_back(evaluate_run(read_run(path), qrels, config));
    const auto& r = reports.back();
    out << "# " << path << "  queries=" << r.num_queries << '\n';
    write_report_tsv(r, out);
    if (r.skipped_unjudged > 0)
      err << "warning: " << path << ": " << r.skipped_unjudged << " queries have no judgments\n";
    if (r.skipped_no_relevant > 0)
      err << "warning: " << path << ": " << r.skipped_no_relevant << " queries have no relevant documents\n";
  }
  if (reports.size() == 2) {
    std::vector<std::string> shared;
    for (const auto& [q, m] : reports[0].per_query)
      if (reports[1].per_query.count(q)) shared.push_back(q);
    out << "# paired t-test over " << shared.size() << " shared queries (a = first run, b = second)\n";
    out << "metric\tmean_a\tmean_b\tt\tp\tp<0.05\n";
    using Field = double QueryMetrics::*;
    const std::pair<const char*, Field> fields[] = {{"ndcg@5", &QueryMetrics::ndcg_at_5},
                                                   {"p@5", &QueryMetrics::p_at_5},
                                                   {"r@100", &QueryMetrics::r_at_100},
                                                   {"map", &QueryMetrics::ap}};
    for (const auto& [name, field] : fields) {
      std::vector<double> a, b;
      for (const auto& q : shared) {
        a.push_back(reports[0].per_query.at(q).*field);
        b.push_back(reports[1].per_query.at(q).*field);
      }
      out << name << '\t';
      if (shared.size() < 2) {
        out << "n/a\tn/a\tn/a\tn/a\tn/a\n";
        continue;
      }
      double ma = 0, mb = 0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
      }
      ma /= static_cast<double>(a.size());
      mb /= static_cast<double>(b.size());
      const auto t = paired_t_test(a, b);
      char line[128];
      std::snprintf(line, sizeof line, "%.4f\t%.4f\t%.4f\t%.4g\t%s", ma, mb, t.t_statistic, t.p_value,
                    t.p_value < 0.05 ? "yes" : "no");
      out << line << '\n';
    }
  }
  return kExitOk;
}

int cmd_trace(const std::string& path, const std::string& only, std::ostream& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open trace file " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    std::string qid;
    ReformulationTrace t;
    try {
      t = trace_from_json(line, &qid);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
    if (!only.empty() && qid != only) continue;
    print_trace(t, qid, out);
  }
  return kExitOk;
}

int cmd_census(const Settings& s, bool totals_only, std::ostream& out) {
  const Config config = make_config(s);
  std::vector<Document> collection;
  if (auto p = s.get("collection")) collection = load_collection(*p);
  const auto sessions = load_topics(s.require("topics", "topics"));
  const IdfTable idf = load_idf(s, &collection);
  const auto census = ambiguity_census(sessions, idf, config, make_analyzer(s));
  if (totals_only) {
    out << "Coreference\t" << census.coreference_count << "\nOmission\t" << census.omission_count << '\n';
  } else {
    write_census_tsv(census, out);
  }
  return kExitOk;
}

int cmd_repl(const Settings& s, std::istream& in, std::ostream& out, std::ostream& err) {
  const Config config = make_config(s);
  echo_config(config, s, err);
  const auto collection = load_collection(s.require("collection", "collection"));
  std::map<std::string, const Document*> by_id;
  for (const auto& d : collection) by_id[d.doc_id] = &d;
  const IdfTable idf = load_idf(s, &collection);
  const SearchBackend backend = make_backend(s, &collection);
  std::unique_ptr<Reader> reader =
      s.get("reader") ? make_reader(*s.get("reader")) : std::unique_ptr<Reader>(std::make_unique<EchoReader>());
  const Analyzer analyzer = make_analyzer(s);
  const int k = depth_of(s, 5);

  Session session{"repl", {}};
  std::optional<ReformulationTrace> last;
  std::string line;
  out << "zeqr> " << std::flush;
  while (std::getline(in, line)) {
    auto input = std::string(text::trim(line));
    if (input == ":quit" || input == ":q") break;
    if (input == ":reset") {
      session.turns.clear();
      last.reset();
      out << "(context cleared)\n";
    } else if (input == ":trace") {
      if (last) out << trace_to_json(*last) << '\n';
      else out << "(no turn yet)\n";
    } else if (!input.empty()) {
      try {
        Turn turn{static_cast<int>(session.turns.size()) + 1, input, std::nullopt, std::nullopt};
        session.turns.push_back(turn);
        const auto ctx = context_for_turn(session, turn.turn_id, config);
        auto trace = reformulate(turn, ctx, idf, *reader, config, analyzer);
        print_trace(trace, "turn " + std::to_string(turn.turn_id), out);
        auto run = backend.search(trace.q_double_star, k, config, "repl", "repl");
        for (std::size_t i = 0; i < run.ranked.size(); ++i) {
          const auto& hit = run.ranked[i];
          auto it = by_id.find(hit.doc_id);
          out << "  " << (i + 1) << ". " << hit.doc_id << "  " << std::fixed << std::setprecision(4)
              << hit.score << std::defaultfloat << "  "
              << (it == by_id.end() ? std::string() : snippet(it->second->body)) << '\n';
        }
        if (run.ranked.empty()) out << "  (no results)\n";
        // The top hit plays the canonical passage for the next turn.
        if (!run.ranked.empty()) {
          auto it = by_id.find(run.ranked.front().doc_id);
          if (it != by_id.end()) {
            session.turns.back().canonical_answer = it->second->body;
            session.turns.back().canonical_answer_id = it->first;
          }
        }
        last = std::move(trace);
      } catch (const Error& e) {
        out << "error: " << e.what() << '\n';
      }
    }
    out << "zeqr> " << std::flush;
  }
  out << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-shot conversational query reformulation toolkit", "zeqr"};
  app.require_subcommand(1);

  Invocation inv;
  std::string out_dir, run_out, trace_out, trace_path, only_query;
  std::vector<std::string> run_paths;
  bool totals_only = false;

  auto* index = app.add_subcommand("index", "Build the BM25 index and IDF table");
  add_config_flags(index, inv, {"collection", "stopwords", "s_stemmer"});
  index->add_option("--out", out_dir, "output directory")->required();

  auto* run_cmd = app.add_subcommand("run", "Reformulate every topic turn and retrieve");
  add_config_flags(run_cmd, inv,
                   {"collection", "topics", "index", "idf_cache", "reader", "retriever", "mode", "depth", "tag",
                    "idf_threshold", "premodifier_idf_threshold", "omission_strictness", "bm25_k1", "bm25_b",
                    "reader_max_tokens", "min_answer_score", "pronouns", "stopwords", "s_stemmer"});
  run_cmd->add_option("--out", run_out, "TREC run file to write")->required();
  run_cmd->add_option("--trace-out", trace_out, "JSON-lines trace file to write");

  auto* eval = app.add_subcommand("eval", "Score one run, or compare two with a paired t-test");
  add_config_flags(eval, inv, {"qrels", "map_relevance_cutoff"});
  eval->add_option("--run", run_paths, "run file (give twice to compare)")->required();

  auto* trace = app.add_subcommand("trace", "Pretty-print a trace file");
  trace->add_option("--traces,file", trace_path, "trace JSON-lines file")->required();
  trace->add_option("--query-id", only_query, "only this query");

  auto* census = app.add_subcommand("census", "Count raw queries with coreference / omission ambiguity");
  add_config_flags(census, inv,
                   {"topics", "collection", "index", "idf_cache", "idf_threshold", "premodifier_idf_threshold",
                    "omission_strictness", "pronouns"});
  census->add_flag("--totals-only", totals_only, "print only the two totals");

  auto* repl = app.add_subcommand("repl", "Interactive conversational session");
  add_config_flags(repl, inv,
                   {"collection", "index", "idf_cache", "reader", "retriever", "mode", "depth", "idf_threshold",
                    "premodifier_idf_threshold", "omission_strictness", "bm25_k1", "bm25_b", "reader_max_tokens",
                    "min_answer_score", "pronouns"});

  std::vector<std::string> argv_store{"zeqr"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "zeqr: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const Settings settings = resolve(inv);
    if (*index) return cmd_index(settings, out_dir, out, err);
    if (*run_cmd) return cmd_run(settings, run_out, trace_out, out, err);
    if (*eval) return cmd_eval(settings, run_paths, out, err);
    if (*trace) return cmd_trace(trace_path, only_query, out);
    if (*census) return cmd_census(settings, totals_only, out);
    if (*repl) return cmd_repl(settings, in, out, err);
  } catch (const UsageError& e) {
    err << "zeqr: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "zeqr: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "zeqr: " << e.what() << '\n';
    return kExitUsage;
  } catch (const PreconditionError& e) {
    err << "zeqr: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "zeqr: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace zeqr::cli
