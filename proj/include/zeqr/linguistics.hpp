#pragma once

// Tagging and the two ambiguity detectors: pronouns (coreference) and bare
// important nouns/verbs (omission).

#include <cstddef>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "zeqr/datamodel.hpp"
#include "zeqr/ingest.hpp"

namespace zeqr {

enum class Pos { noun, verb, adj, adp, pron, det, other };

std::string_view to_string(Pos pos);

struct TaggedToken {
  std::string text;
  std::string lemma;  // lowercased surface
  Pos pos = Pos::other;
  std::size_t char_start = 0;  // UTF-8 byte offsets into the source
  std::size_t char_end = 0;

  bool operator==(const TaggedToken&) const = default;
};

// Anything that can produce coarse tags. Implementations must be safe to
// call concurrently.
class Tagger {
 public:
  virtual ~Tagger() = default;
  virtual std::vector<TaggedToken> tag(std::string_view text) const = 0;
};

// Deterministic closed-class lexicon plus suffix and context rules. Good
// enough for short conversational questions; not a general tagger.
class LexiconTagger final : public Tagger {
 public:
  std::vector<TaggedToken> tag(std::string_view text) const override;
};

// Tags with the built-in LexiconTagger. Punctuation and the possessive
// clitic come back as Pos::other tokens.
std::vector<TaggedToken> tokenize_and_tag(std::string_view text);

class PronounInventory {
 public:
  // Third person personal and possessive pronouns, pronominal
  // demonstratives, and anaphoric "one"/"ones".
  static PronounInventory standard();
  // One word per line; blank lines and '#' comments ignored.
  static PronounInventory load(const std::string& path);
  explicit PronounInventory(std::set<std::string> words) : words_(std::move(words)) {}

  bool contains(std::string_view lemma) const;
  const std::set<std::string>& words() const { return words_; }

 private:
  std::set<std::string> words_;
};

struct PronounMention {
  std::size_t token_index = 0;
  std::string surface;
  bool is_possessive = false;

  bool operator==(const PronounMention&) const = default;
};

// Inventory members tagged PRON, left to right.
std::vector<PronounMention> detect_pronouns(
    const std::vector<TaggedToken>& tokens,
    const PronounInventory& inventory = PronounInventory::standard());

enum class WordKind { noun, verb };

std::string_view to_string(WordKind kind);

struct OmissionCandidate {
  std::size_t token_index = 0;
  std::string surface;
  WordKind kind = WordKind::noun;
  double idf = 0.0;

  bool operator==(const OmissionCandidate&) const = default;
};

struct OmissionRules {
  OmissionStrictness strictness = OmissionStrictness::strict;
  // Adjectives above this IDF count as a real description and block
  // resolution of the noun they modify.
  double premodifier_idf_threshold = 2.65;
};

OmissionRules omission_rules(const Config& config);

// Nouns: idf > threshold, head of their noun phrase (not followed by another
// noun, a possessive clitic, or "and/or" + noun), no high-IDF adjective in
// the premodifier run, and no blocking preposition right after.
// Verbs: idf > threshold, no preposition right after, and no noun later in
// the same clause.
std::vector<OmissionCandidate> find_omission_candidates(const std::vector<TaggedToken>& tokens,
                                                        const IdfTable& idf, double threshold,
                                                        const OmissionRules& rules = {});

}  // namespace zeqr
