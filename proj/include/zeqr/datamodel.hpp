#pragma once

// Sessions, turns, and the dialogue context handed to the reader.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace zeqr {

struct Turn {
  int turn_id = 0;  // 1-based
  std::string raw_query;
  std::optional<std::string> canonical_answer;
  std::optional<std::string> canonical_answer_id;

  bool operator==(const Turn&) const = default;
};

struct Session {
  std::string session_id;
  std::vector<Turn> turns;

  bool operator==(const Session&) const = default;
};

// Throws PreconditionError when a turn has a blank query, turns are empty,
// or turn ids are not exactly 1..N in order.
void validate(const Session& session);

// Query id used in run files and qrels, e.g. "31_4".
std::string query_id(const Session& session, const Turn& turn);

struct DialogueContext {
  std::vector<std::string> prior_queries;
  std::optional<std::string> latest_answer;
  bool truncated = false;

  bool empty() const { return prior_queries.empty() && !latest_answer; }
  bool operator==(const DialogueContext&) const = default;
};

enum class Mode { full, coref_only, omission_only, passthrough };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view name);  // throws PreconditionError

// Which following prepositions stop a word from being treated as bare.
//   strict:  any ADP
//   of_only: only the template's own preposition ("of" for nouns, "to" for verbs)
enum class OmissionStrictness { strict, of_only };

std::string_view to_string(OmissionStrictness s);
OmissionStrictness parse_strictness(std::string_view name);

struct Config {
  double idf_threshold = 2.65;
  double bm25_k1 = 0.9;
  double bm25_b = 0.4;
  int reader_max_tokens = 512;
  double min_answer_score = 0.0;
  Mode mode = Mode::full;
  int map_relevance_cutoff = 1;
  OmissionStrictness omission_strictness = OmissionStrictness::strict;
  // Adjectives with IDF above this count as a real description of the noun
  // they precede. Kept apart from idf_threshold so that raising the gate
  // can only remove candidates.
  double premodifier_idf_threshold = 2.65;

  // Throws PreconditionError on out-of-range values.
  void validate() const;
};

// Tokens kept free for the question and separator when context_for_turn
// trims the latest answer.
inline constexpr std::size_t kQuestionTokenReserve = 64;

// Context for turn `turn_id`: every earlier raw query plus the most recent
// earlier canonical answer, trimmed from its tail so the serialized context
// leaves kQuestionTokenReserve tokens of the reader budget free.
DialogueContext context_for_turn(const Session& session, int turn_id, const Config& config);

// Prior queries joined by single spaces, then the latest answer.
std::string serialize_context(const DialogueContext& context);

}  // namespace zeqr
