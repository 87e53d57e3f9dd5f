#include "zeqr/reformulator.hpp"

#include <json.hpp>

#include "zeqr/error.hpp"
#include "zeqr/text.hpp"

namespace zeqr {

using nlohmann::json;

std::string make_coref_question(std::string_view pronoun, std::string_view query) {
  if (pronoun.empty() || query.empty())
    throw PreconditionError("coreference question needs a pronoun and a query");
  return "What is " + std::string(pronoun) + " refer to, in \"" + std::string(query) + "\"";
}

std::string_view preposition_for(WordKind kind) { return kind == WordKind::noun ? "of" : "to"; }

std::string make_omission_question(std::string_view word, WordKind kind, std::string_view query) {
  if (word.empty() || query.empty())
    throw PreconditionError("omission question needs a word and a query");
  return std::string(word) + " " + std::string(preposition_for(kind)) + " what, in \"" +
         std::string(query) + "\"";
}

bool ReformulationTrace::has_errors() const {
  auto failed = [](const std::string& reason) { return reason.rfind("error", 0) == 0; };
  for (const auto& s : coref_steps)
    if (failed(s.skip_reason)) return true;
  for (const auto& s : omission_steps)
    if (failed(s.skip_reason)) return true;
  return false;
}

namespace {

// Span text with surrounding blanks and trailing sentence punctuation
// dropped; still a substring of the context.
std::string_view clean_answer(std::string_view answer) {
  answer = text::trim(answer);
  while (!answer.empty() && std::string_view(".,;:!?").find(answer.back()) != std::string_view::npos)
    answer.remove_suffix(1);
  return text::trim(answer);
}

// Queries the reader, filling answer/skip_reason. Returns the usable answer
// text, or nullopt when the step must be skipped.
template <typename Step>
std::optional<std::string> ask(Step& step, std::string_view focus, const DialogueContext& context,
                               const Reader& reader, const Config& config) {
  if (context.empty()) {
    step.skip_reason = "no_context";
    return std::nullopt;
  }
  try {
    auto input = build_reader_input(step.question, context, config);
    if (text::trim(input.context).empty()) {
      step.skip_reason = "no_context";
      return std::nullopt;
    }
    step.answer = extract_span(reader, input);
  } catch (const Error& e) {
    step.skip_reason = std::string("error: ") + e.what();
    return std::nullopt;
  }
  if (!step.answer) {
    step.skip_reason = "no_answer";
    return std::nullopt;
  }
  if (step.answer->score < config.min_answer_score) {
    step.skip_reason = "low_score";
    return std::nullopt;
  }
  std::string_view cleaned = clean_answer(step.answer->text);
  if (cleaned.empty()) {
    step.skip_reason = "no_answer";
    return std::nullopt;
  }
  if (text::iequals(cleaned, focus)) {
    step.skip_reason = "echo";
    return std::nullopt;
  }
  return std::string(cleaned);
}

}  // namespace

CorefResult resolve_coreference(std::string_view query, const DialogueContext& context,
                                const Reader& reader, const Config& config,
                                const Analyzer& analyzer) {
  CorefResult result{std::string(query), {}};
  const auto tokens = analyzer.tagger->tag(query);
  const auto mentions = detect_pronouns(tokens, analyzer.inventory);
  long long shift = 0;
  for (const auto& m : mentions) {
    CorefStep step;
    step.pronoun = m;
    step.question = make_coref_question(m.surface, result.q_star);
    auto answer = ask(step, m.surface, context, reader, config);
    if (answer) {
      std::string replacement = *answer;
      if (m.is_possessive && !(replacement.size() > 2 &&
                               text::iequals(replacement.substr(replacement.size() - 2), "'s")))
        replacement += "'s";
      const auto& tok = tokens[m.token_index];
      const auto start = static_cast<std::size_t>(static_cast<long long>(tok.char_start) + shift);
      result.q_star.replace(start, tok.char_end - tok.char_start, replacement);
      shift += static_cast<long long>(replacement.size()) -
               static_cast<long long>(tok.char_end - tok.char_start);
      step.applied = true;
    }
    result.steps.push_back(std::move(step));
  }
  return result;
}

OmissionResult resolve_omission(std::string_view q_star, const DialogueContext& context,
                                const IdfTable& idf, const Reader& reader, const Config& config,
                                const Analyzer& analyzer) {
  if (text::trim(q_star).empty()) throw PreconditionError("resolve_omission needs a query");
  OmissionResult result{std::string(q_star), {}};
  const auto tokens = analyzer.tagger->tag(q_star);
  const auto candidates =
      find_omission_candidates(tokens, idf, config.idf_threshold, omission_rules(config));
  long long shift = 0;
  for (const auto& c : candidates) {
    OmissionStep step;
    step.candidate = c;
    step.preposition = std::string(preposition_for(c.kind));
    step.question = make_omission_question(c.surface, c.kind, result.q_double_star);
    auto answer = ask(step, c.surface, context, reader, config);
    if (answer && text::ifind(result.q_double_star, *answer) != std::string::npos) {
      step.skip_reason = "duplicate";
      answer.reset();
    }
    if (answer) {
      const std::string insertion = " " + step.preposition + " " + *answer;
      const auto at =
          static_cast<std::size_t>(static_cast<long long>(tokens[c.token_index].char_end) + shift);
      result.q_double_star.insert(at, insertion);
      shift += static_cast<long long>(insertion.size());
      step.applied = true;
    }
    result.steps.push_back(std::move(step));
  }
  return result;
}

ReformulationTrace reformulate(const Turn& turn, const DialogueContext& context,
                               const IdfTable& idf, const Reader& reader, const Config& config,
                               const Analyzer& analyzer) {
  ReformulationTrace trace;
  trace.raw_query = turn.raw_query;
  trace.mode = config.mode;
  trace.q_star = turn.raw_query;
  if (config.mode == Mode::full || config.mode == Mode::coref_only) {
    auto coref = resolve_coreference(turn.raw_query, context, reader, config, analyzer);
    trace.q_star = std::move(coref.q_star);
    trace.coref_steps = std::move(coref.steps);
  }
  trace.q_double_star = trace.q_star;
  if ((config.mode == Mode::full || config.mode == Mode::omission_only) &&
      !text::trim(trace.q_star).empty()) {
    auto omission = resolve_omission(trace.q_star, context, idf, reader, config, analyzer);
    trace.q_double_star = std::move(omission.q_double_star);
    trace.omission_steps = std::move(omission.steps);
  }
  return trace;
}

namespace {

json answer_json(const std::optional<SpanAnswer>& a) {
  if (!a) return nullptr;
  return {{"text", a->text}, {"start", a->char_start}, {"end", a->char_end}, {"score", a->score}};
}

std::optional<SpanAnswer> answer_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return SpanAnswer{j.at("text").get<std::string>(), j.at("start").get<std::size_t>(),
                    j.at("end").get<std::size_t>(), j.at("score").get<double>()};
}

}  // namespace

std::string trace_to_json(const ReformulationTrace& trace, std::string_view query_id) {
  json j;
  if (!query_id.empty()) j["query_id"] = std::string(query_id);
  j["raw_query"] = trace.raw_query;
  j["mode"] = std::string(to_string(trace.mode));
  j["coref_steps"] = json::array();
  for (const auto& s : trace.coref_steps) {
    j["coref_steps"].push_back(
        {{"pronoun",
          {{"token_index", s.pronoun.token_index},
           {"surface", s.pronoun.surface},
           {"is_possessive", s.pronoun.is_possessive}}},
         {"question", s.question},
         {"answer", answer_json(s.answer)},
         {"applied", s.applied},
         {"skip_reason", s.skip_reason}});
  }
  j["q_star"] = trace.q_star;
  j["omission_steps"] = json::array();
  for (const auto& s : trace.omission_steps) {
    j["omission_steps"].push_back({{"candidate",
                                    {{"token_index", s.candidate.token_index},
                                     {"surface", s.candidate.surface},
                                     {"kind", std::string(to_string(s.candidate.kind))},
                                     {"idf", s.candidate.idf}}},
                                   {"preposition", s.preposition},
                                   {"question", s.question},
                                   {"answer", answer_json(s.answer)},
                                   {"applied", s.applied},
                                   {"skip_reason", s.skip_reason}});
  }
  j["q_double_star"] = trace.q_double_star;
  return j.dump();
}

ReformulationTrace trace_from_json(std::string_view line, std::string* query_id) {
  ReformulationTrace t;
  try {
    json j = json::parse(line);
    if (query_id) *query_id = j.value("query_id", std::string());
    t.raw_query = j.at("raw_query").get<std::string>();
    t.mode = parse_mode(j.at("mode").get<std::string>());
    for (const auto& s : j.at("coref_steps")) {
      CorefStep step;
      const auto& p = s.at("pronoun");
      step.pronoun = {p.at("token_index").get<std::size_t>(), p.at("surface").get<std::string>(),
                      p.at("is_possessive").get<bool>()};
      step.question = s.at("question").get<std::string>();
      step.answer = answer_from(s.at("answer"));
      step.applied = s.at("applied").get<bool>();
      step.skip_reason = s.value("skip_reason", std::string());
      t.coref_steps.push_back(std::move(step));
    }
    t.q_star = j.at("q_star").get<std::string>();
    for (const auto& s : j.at("omission_steps")) {
      OmissionStep step;
      const auto& c = s.at("candidate");
      step.candidate = {c.at("token_index").get<std::size_t>(), c.at("surface").get<std::string>(),
                        c.at("kind").get<std::string>() == "verb" ? WordKind::verb : WordKind::noun,
                        c.at("idf").get<double>()};
      step.preposition = s.at("preposition").get<std::string>();
      step.question = s.at("question").get<std::string>();
      step.answer = answer_from(s.at("answer"));
      step.applied = s.at("applied").get<bool>();
      step.skip_reason = s.value("skip_reason", std::string());
      t.omission_steps.push_back(std::move(step));
    }
    t.q_double_star = j.at("q_double_star").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad trace record: ") + e.what());
  } catch (const PreconditionError& e) {
    throw ParseError(std::string("bad trace record: ") + e.what());
  }
  return t;
}

}  // namespace zeqr
