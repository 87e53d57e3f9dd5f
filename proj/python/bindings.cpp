#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "zeqr/datamodel.hpp"
#include "zeqr/error.hpp"
#include "zeqr/evaluation.hpp"
#include "zeqr/ingest.hpp"
#include "zeqr/linguistics.hpp"
#include "zeqr/reader.hpp"
#include "zeqr/reformulator.hpp"
#include "zeqr/retrieval.hpp"

namespace py = pybind11;
using namespace zeqr;

namespace {

// Wraps a Python callable `(question, context) -> str | (str, score) | None`.
class CallableReader final : public Reader {
 public:
  explicit CallableReader(py::function fn) : fn_(std::move(fn)) {}
  ~CallableReader() override {
    py::gil_scoped_acquire gil;
    fn_ = py::function();
  }
  std::string name() const override { return "python"; }
  std::optional<SpanAnswer> answer(const ReaderInput& input) const override {
    py::gil_scoped_acquire gil;
    py::object out = fn_(input.question, input.context);
    if (out.is_none()) return std::nullopt;
    if (py::isinstance<py::tuple>(out)) {
      auto t = out.cast<py::tuple>();
      return locate_span(input.context, t[0].cast<std::string>(), t[1].cast<double>());
    }
    return locate_span(input.context, out.cast<std::string>(), 1.0);
  }

 private:
  py::function fn_;
};

std::unique_ptr<Reader> to_reader(const py::object& reader) {
  if (py::isinstance<py::dict>(reader)) {
    std::map<std::string, OracleReader::Entry> entries;
    for (auto [k, v] : reader.cast<py::dict>()) entries[k.cast<std::string>()] = {v.cast<std::string>(), 1.0};
    return std::make_unique<OracleReader>(std::move(entries));
  }
  if (py::isinstance<py::str>(reader)) return make_reader(reader.cast<std::string>());
  if (py::isinstance<py::function>(reader)) return std::make_unique<CallableReader>(reader.cast<py::function>());
  throw PreconditionError("reader must be a dict, a callable, or a reader spec string");
}

IdfTable idf_from(const py::object& idf) {
  if (py::isinstance<IdfTable>(idf)) return idf.cast<IdfTable>();
  IdfTable t;
  t.term_idf = idf.cast<std::map<std::string, double>>();
  t.num_docs = t.term_idf.size();
  t.default_idf = 0.0;
  return t;
}

Qrels qrels_from(const std::map<std::string, std::map<std::string, int>>& judged) {
  Qrels q;
  for (const auto& [qid, docs] : judged)
    for (const auto& [doc, grade] : docs) q.set(qid, doc, grade);
  return q;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Zero-shot conversational query reformulation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<RangeError>(m, "RangeError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<NoContextError>(m, "NoContextError", base.ptr());
  py::register_exception<TransportError>(m, "TransportError", base.ptr());
  py::register_exception<ProtocolError>(m, "ProtocolError", base.ptr());
  py::register_exception<RetrievalError>(m, "RetrievalError", base.ptr());

  py::enum_<Mode>(m, "Mode")
      .value("full", Mode::full)
      .value("coref_only", Mode::coref_only)
      .value("omission_only", Mode::omission_only)
      .value("passthrough", Mode::passthrough);
  py::enum_<OmissionStrictness>(m, "OmissionStrictness")
      .value("strict", OmissionStrictness::strict)
      .value("of_only", OmissionStrictness::of_only);
  py::enum_<Pos>(m, "Pos")
      .value("noun", Pos::noun)
      .value("verb", Pos::verb)
      .value("adj", Pos::adj)
      .value("adp", Pos::adp)
      .value("pron", Pos::pron)
      .value("det", Pos::det)
      .value("other", Pos::other);
  py::enum_<WordKind>(m, "WordKind").value("noun", WordKind::noun).value("verb", WordKind::verb);

  py::class_<Config>(m, "Config")
      .def(py::init<>())
      .def_readwrite("idf_threshold", &Config::idf_threshold)
      .def_readwrite("bm25_k1", &Config::bm25_k1)
      .def_readwrite("bm25_b", &Config::bm25_b)
      .def_readwrite("reader_max_tokens", &Config::reader_max_tokens)
      .def_readwrite("min_answer_score", &Config::min_answer_score)
      .def_readwrite("mode", &Config::mode)
      .def_readwrite("map_relevance_cutoff", &Config::map_relevance_cutoff)
      .def_readwrite("omission_strictness", &Config::omission_strictness)
      .def_readwrite("premodifier_idf_threshold", &Config::premodifier_idf_threshold)
      .def("validate", &Config::validate);

  py::class_<Turn>(m, "Turn")
      .def(py::init([](int turn_id, std::string raw_query, std::optional<std::string> answer,
                       std::optional<std::string> answer_id) {
             return Turn{turn_id, std::move(raw_query), std::move(answer), std::move(answer_id)};
           }),
           py::arg("turn_id"), py::arg("raw_query"), py::arg("canonical_answer") = py::none(),
           py::arg("canonical_answer_id") = py::none())
      .def_readwrite("turn_id", &Turn::turn_id)
      .def_readwrite("raw_query", &Turn::raw_query)
      .def_readwrite("canonical_answer", &Turn::canonical_answer)
      .def_readwrite("canonical_answer_id", &Turn::canonical_answer_id);

  py::class_<Session>(m, "Session")
      .def(py::init([](std::string id, std::vector<Turn> turns) { return Session{std::move(id), std::move(turns)}; }),
           py::arg("session_id"), py::arg("turns"))
      .def_readwrite("session_id", &Session::session_id)
      .def_readwrite("turns", &Session::turns);

  py::class_<DialogueContext>(m, "DialogueContext")
      .def(py::init([](std::vector<std::string> prior, std::optional<std::string> latest) {
             return DialogueContext{std::move(prior), std::move(latest), false};
           }),
           py::arg("prior_queries") = std::vector<std::string>{}, py::arg("latest_answer") = py::none())
      .def_readonly("prior_queries", &DialogueContext::prior_queries)
      .def_readonly("latest_answer", &DialogueContext::latest_answer)
      .def_readonly("truncated", &DialogueContext::truncated)
      .def("empty", &DialogueContext::empty)
      .def("__str__", &serialize_context);

  m.def("context_for_turn", &context_for_turn, py::arg("session"), py::arg("turn_id"), py::arg("config") = Config{});
  m.def("load_topics", [](const std::string& path) { return load_topics(path); }, py::arg("path"));

  py::class_<TaggedToken>(m, "TaggedToken")
      .def_readonly("text", &TaggedToken::text)
      .def_readonly("lemma", &TaggedToken::lemma)
      .def_readonly("pos", &TaggedToken::pos)
      .def_readonly("char_start", &TaggedToken::char_start)
      .def_readonly("char_end", &TaggedToken::char_end)
      .def("__repr__", [](const TaggedToken& t) { return t.text + "/" + std::string(to_string(t.pos)); });
  m.def("tokenize_and_tag", &tokenize_and_tag, py::arg("text"));

  py::class_<PronounMention>(m, "PronounMention")
      .def_readonly("token_index", &PronounMention::token_index)
      .def_readonly("surface", &PronounMention::surface)
      .def_readonly("is_possessive", &PronounMention::is_possessive);
  m.def("detect_pronouns", [](std::string_view q) { return detect_pronouns(tokenize_and_tag(q)); }, py::arg("query"));

  py::class_<OmissionCandidate>(m, "OmissionCandidate")
      .def_readonly("token_index", &OmissionCandidate::token_index)
      .def_readonly("surface", &OmissionCandidate::surface)
      .def_readonly("kind", &OmissionCandidate::kind)
      .def_readonly("idf", &OmissionCandidate::idf);

  py::class_<IdfTable>(m, "IdfTable")
      .def_readonly("num_docs", &IdfTable::num_docs)
      .def_readonly("default_idf", &IdfTable::default_idf)
      .def("idf", &IdfTable::idf);

  py::class_<Document>(m, "Document")
      .def(py::init([](std::string id, std::string body) { return Document{std::move(id), std::move(body)}; }),
           py::arg("doc_id"), py::arg("body"))
      .def_readonly("doc_id", &Document::doc_id)
      .def_readonly("body", &Document::body);
  m.def("load_collection", &load_collection, py::arg("path"));
  m.def("build_idf_table", &build_idf_table, py::arg("collection"));

  m.def(
      "find_omission_candidates",
      [](std::string_view q, const py::object& idf, const Config& config) {
        return find_omission_candidates(tokenize_and_tag(q), idf_from(idf), config.idf_threshold,
                                        omission_rules(config));
      },
      py::arg("query"), py::arg("idf"), py::arg("config") = Config{},
      "`idf` is an IdfTable or a {term: idf} dict (unlisted terms get 0).");

  m.def("make_coref_question", &make_coref_question, py::arg("pronoun"), py::arg("query"));
  m.def("make_omission_question", &make_omission_question, py::arg("word"), py::arg("kind"), py::arg("query"));

  py::class_<SpanAnswer>(m, "SpanAnswer")
      .def_readonly("text", &SpanAnswer::text)
      .def_readonly("char_start", &SpanAnswer::char_start)
      .def_readonly("char_end", &SpanAnswer::char_end)
      .def_readonly("score", &SpanAnswer::score);
  py::class_<CorefStep>(m, "CorefStep")
      .def_readonly("pronoun", &CorefStep::pronoun)
      .def_readonly("question", &CorefStep::question)
      .def_readonly("answer", &CorefStep::answer)
      .def_readonly("applied", &CorefStep::applied)
      .def_readonly("skip_reason", &CorefStep::skip_reason);
  py::class_<OmissionStep>(m, "OmissionStep")
      .def_readonly("candidate", &OmissionStep::candidate)
      .def_readonly("preposition", &OmissionStep::preposition)
      .def_readonly("question", &OmissionStep::question)
      .def_readonly("answer", &OmissionStep::answer)
      .def_readonly("applied", &OmissionStep::applied)
      .def_readonly("skip_reason", &OmissionStep::skip_reason);
  py::class_<ReformulationTrace>(m, "ReformulationTrace")
      .def_readonly("raw_query", &ReformulationTrace::raw_query)
      .def_readonly("mode", &ReformulationTrace::mode)
      .def_readonly("coref_steps", &ReformulationTrace::coref_steps)
      .def_readonly("q_star", &ReformulationTrace::q_star)
      .def_readonly("omission_steps", &ReformulationTrace::omission_steps)
      .def_readonly("q_double_star", &ReformulationTrace::q_double_star)
      .def("has_errors", &ReformulationTrace::has_errors)
      .def("to_json", &trace_to_json, py::arg("query_id") = "");

  m.def(
      "reformulate",
      [](const std::string& query, const DialogueContext& context, const py::object& idf, const py::object& reader,
         const Config& config) {
        auto r = to_reader(reader);
        const auto table = idf_from(idf);
        Turn turn{1, query, std::nullopt, std::nullopt};
        py::gil_scoped_release release;
        return reformulate(turn, context, table, *r, config);
      },
      py::arg("query"), py::arg("context"), py::arg("idf"), py::arg("reader"), py::arg("config") = Config{},
      "`reader` is a {question-or-stem: answer} dict, a callable (question, context) -> answer | (answer, score) "
      "| None, or a reader spec such as 'remote:http://host:port'.");

  py::class_<InvertedIndex>(m, "InvertedIndex")
      .def_readonly("num_docs", &InvertedIndex::num_docs)
      .def_readonly("avg_doc_length", &InvertedIndex::avg_doc_length)
      .def("df", &InvertedIndex::df);
  m.def(
      "build_index",
      [](const std::vector<Document>& docs, bool stopwords, bool s_stemmer) {
        return build_index(docs, {stopwords, s_stemmer});
      },
      py::arg("collection"), py::arg("remove_stopwords") = false, py::arg("s_stemmer") = false);

  py::class_<ScoredDoc>(m, "ScoredDoc")
      .def(py::init([](std::string id, double score) { return ScoredDoc{std::move(id), score}; }))
      .def_readonly("doc_id", &ScoredDoc::doc_id)
      .def_readonly("score", &ScoredDoc::score)
      .def("__repr__", [](const ScoredDoc& d) { return "(" + d.doc_id + ", " + std::to_string(d.score) + ")"; });
  py::class_<RunResult>(m, "RunResult")
      .def(py::init([](std::string qid, std::vector<ScoredDoc> ranked, std::string tag) {
             return RunResult{std::move(qid), std::move(ranked), std::move(tag)};
           }),
           py::arg("query_id"), py::arg("ranked"), py::arg("tag") = "zeqr")
      .def_readonly("query_id", &RunResult::query_id)
      .def_readonly("ranked", &RunResult::ranked)
      .def_readonly("tag", &RunResult::tag);
  m.def("bm25_search", &bm25_search, py::arg("index"), py::arg("query"), py::arg("k") = 1000,
        py::arg("config") = Config{}, py::arg("query_id") = "", py::arg("tag") = "zeqr");

  py::class_<QueryMetrics>(m, "QueryMetrics")
      .def_readonly("ndcg_at_5", &QueryMetrics::ndcg_at_5)
      .def_readonly("p_at_5", &QueryMetrics::p_at_5)
      .def_readonly("r_at_100", &QueryMetrics::r_at_100)
      .def_readonly("ap", &QueryMetrics::ap);
  py::class_<MetricReport>(m, "MetricReport")
      .def_readonly("per_query", &MetricReport::per_query)
      .def_readonly("means", &MetricReport::means)
      .def_readonly("num_queries", &MetricReport::num_queries)
      .def_readonly("skipped_unjudged", &MetricReport::skipped_unjudged)
      .def_readonly("skipped_no_relevant", &MetricReport::skipped_no_relevant);
  m.def(
      "evaluate_run",
      [](const std::vector<RunResult>& run, const std::map<std::string, std::map<std::string, int>>& qrels,
         const Config& config) { return evaluate_run(run, qrels_from(qrels), config); },
      py::arg("run"), py::arg("qrels"), py::arg("config") = Config{},
      "`qrels` maps query id to {doc_id: grade}.");

  py::class_<TTestResult>(m, "TTestResult")
      .def_readonly("t_statistic", &TTestResult::t_statistic)
      .def_readonly("p_value", &TTestResult::p_value)
      .def_readonly("degrees_of_freedom", &TTestResult::degrees_of_freedom)
      .def_readonly("degenerate", &TTestResult::degenerate);
  m.def(
      "paired_t_test",
      [](const std::vector<double>& a, const std::vector<double>& b) { return paired_t_test(a, b); }, py::arg("a"),
      py::arg("b"));

  py::class_<CensusFlags>(m, "CensusFlags")
      .def_readonly("has_coref", &CensusFlags::has_coref)
      .def_readonly("has_omission", &CensusFlags::has_omission);
  py::class_<AmbiguityCensus>(m, "AmbiguityCensus")
      .def_readonly("coreference_count", &AmbiguityCensus::coreference_count)
      .def_readonly("omission_count", &AmbiguityCensus::omission_count)
      .def_readonly("per_turn", &AmbiguityCensus::per_turn);
  m.def(
      "ambiguity_census",
      [](const std::vector<Session>& sessions, const py::object& idf, const Config& config) {
        return ambiguity_census(sessions, idf_from(idf), config);
      },
      py::arg("sessions"), py::arg("idf"), py::arg("config") = Config{});
}
