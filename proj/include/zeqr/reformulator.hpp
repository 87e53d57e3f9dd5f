#pragma once

// Two-step query rewriting: pronouns are replaced by the referent the reader
// finds in the dialogue context, then bare important words get the missing
// description appended ("treatments" -> "treatments of <answer>").

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zeqr/datamodel.hpp"
#include "zeqr/ingest.hpp"
#include "zeqr/linguistics.hpp"
#include "zeqr/reader.hpp"

namespace zeqr {

// `What is {pronoun} refer to, in "{query}"`, grammar included.
std::string make_coref_question(std::string_view pronoun, std::string_view query);

// `{word} of what, in "{query}"` for nouns, `{word} to what, ...` for verbs.
std::string make_omission_question(std::string_view word, WordKind kind, std::string_view query);

std::string_view preposition_for(WordKind kind);

struct CorefStep {
  PronounMention pronoun;
  std::string question;
  std::optional<SpanAnswer> answer;
  bool applied = false;
  // Why the step left the text alone: no_context, no_answer, low_score,
  // echo, or "error: ..." when the reader failed.
  std::string skip_reason;
};

struct OmissionStep {
  OmissionCandidate candidate;
  std::string preposition;
  std::string question;
  std::optional<SpanAnswer> answer;
  bool applied = false;
  // no_context, no_answer, low_score, echo, duplicate, or "error: ...".
  std::string skip_reason;
};

struct ReformulationTrace {
  std::string raw_query;
  Mode mode = Mode::full;
  std::vector<CorefStep> coref_steps;
  std::string q_star;
  std::vector<OmissionStep> omission_steps;
  std::string q_double_star;

  // True when any step hit a reader error.
  bool has_errors() const;
};

// Tagger and pronoun list used by the detectors.
struct Analyzer {
  std::shared_ptr<const Tagger> tagger = std::make_shared<LexiconTagger>();
  PronounInventory inventory = PronounInventory::standard();
};

struct CorefResult {
  std::string q_star;
  std::vector<CorefStep> steps;
};

struct OmissionResult {
  std::string q_double_star;
  std::vector<OmissionStep> steps;
};

// Replaces pronouns left to right. Possessives become "<answer>'s".
CorefResult resolve_coreference(std::string_view query, const DialogueContext& context,
                                const Reader& reader, const Config& config,
                                const Analyzer& analyzer = {});

// Detects candidates on `q_star` and inserts " of <answer>" / " to <answer>"
// right after each focal word.
OmissionResult resolve_omission(std::string_view q_star, const DialogueContext& context,
                                const IdfTable& idf, const Reader& reader, const Config& config,
                                const Analyzer& analyzer = {});

// Runs the steps selected by config.mode; coreference always goes first.
ReformulationTrace reformulate(const Turn& turn, const DialogueContext& context,
                               const IdfTable& idf, const Reader& reader, const Config& config,
                               const Analyzer& analyzer = {});

// One JSON object per trace (no trailing newline). `query_id` is added as
// an extra field when non-empty.
std::string trace_to_json(const ReformulationTrace& trace, std::string_view query_id = {});
ReformulationTrace trace_from_json(std::string_view line, std::string* query_id = nullptr);

}  // namespace zeqr
