#include "zeqr/datamodel.hpp"

#include "zeqr/error.hpp"
#include "zeqr/text.hpp"

namespace zeqr {

void validate(const Session& session) {
  if (session.turns.empty())
    throw PreconditionError("session " + session.session_id + " has no turns");
  for (std::size_t i = 0; i < session.turns.size(); ++i) {
    const Turn& t = session.turns[i];
    if (t.turn_id != static_cast<int>(i) + 1)
      throw PreconditionError("session " + session.session_id + ": turn ids must run 1.." +
                              std::to_string(session.turns.size()) + ", found " +
                              std::to_string(t.turn_id) + " at position " +
                              std::to_string(i + 1));
    if (text::trim(t.raw_query).empty())
      throw PreconditionError("session " + session.session_id + " turn " +
                              std::to_string(t.turn_id) + ": empty raw query");
  }
}

std::string query_id(const Session& session, const Turn& turn) {
  return session.session_id + "_" + std::to_string(turn.turn_id);
}

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::full: return "full";
    case Mode::coref_only: return "coref_only";
    case Mode::omission_only: return "omission_only";
    case Mode::passthrough: return "passthrough";
  }
  return "full";
}

Mode parse_mode(std::string_view name) {
  if (name == "full") return Mode::full;
  if (name == "coref_only") return Mode::coref_only;
  if (name == "omission_only") return Mode::omission_only;
  if (name == "passthrough") return Mode::passthrough;
  throw PreconditionError("unknown mode '" + std::string(name) +
                          "' (expected full, coref_only, omission_only, passthrough)");
}

std::string_view to_string(OmissionStrictness s) {
  return s == OmissionStrictness::strict ? "strict" : "of_only";
}

OmissionStrictness parse_strictness(std::string_view name) {
  if (name == "strict") return OmissionStrictness::strict;
  if (name == "of_only") return OmissionStrictness::of_only;
  throw PreconditionError("unknown omission strictness '" + std::string(name) +
                          "' (expected strict or of_only)");
}

void Config::validate() const {
  if (!(idf_threshold >= 0)) throw PreconditionError("idf_threshold must be >= 0");
  if (!(premodifier_idf_threshold >= 0))
    throw PreconditionError("premodifier_idf_threshold must be >= 0");
  if (!(bm25_k1 > 0)) throw PreconditionError("bm25_k1 must be > 0");
  if (!(bm25_b >= 0 && bm25_b <= 1)) throw PreconditionError("bm25_b must be in [0,1]");
  if (reader_max_tokens <= 0) throw PreconditionError("reader_max_tokens must be > 0");
  if (map_relevance_cutoff <= 0) throw PreconditionError("map_relevance_cutoff must be > 0");
}

std::string serialize_context(const DialogueContext& context) {
  std::string out;
  for (const auto& q : context.prior_queries) {
    if (!out.empty()) out += ' ';
    out += q;
  }
  if (context.latest_answer && !context.latest_answer->empty()) {
    if (!out.empty()) out += ' ';
    out += *context.latest_answer;
  }
  return out;
}

DialogueContext context_for_turn(const Session& session, int turn_id, const Config& config) {
  if (turn_id < 1 || turn_id > static_cast<int>(session.turns.size()))
    throw RangeError("turn " + std::to_string(turn_id) + " out of range 1.." +
                     std::to_string(session.turns.size()) + " for session " +
                     session.session_id);
  DialogueContext ctx;
  for (int i = 0; i < turn_id - 1; ++i) ctx.prior_queries.push_back(session.turns[i].raw_query);
  for (int i = turn_id - 2; i >= 0; --i) {
    if (session.turns[i].canonical_answer) {
      ctx.latest_answer = session.turns[i].canonical_answer;
      break;
    }
  }
  if (!ctx.latest_answer) return ctx;

  const std::size_t budget = static_cast<std::size_t>(config.reader_max_tokens);
  const std::size_t reserve = std::min(kQuestionTokenReserve, budget);
  std::size_t query_tokens = 0;
  for (const auto& q : ctx.prior_queries) query_tokens += text::count_tokens(q);
  const std::size_t room = budget - reserve > query_tokens ? budget - reserve - query_tokens : 0;
  std::string_view kept = text::truncate_tokens(*ctx.latest_answer, room);
  if (kept.size() < ctx.latest_answer->size()) {
    ctx.latest_answer = std::string(kept);
    ctx.truncated = true;
  }
  return ctx;
}

}  // namespace zeqr
