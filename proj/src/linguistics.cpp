#include "zeqr/linguistics.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <initializer_list>
#include <unordered_map>

#include "zeqr/error.hpp"
#include "zeqr/text.hpp"

namespace zeqr {
namespace {

// Lexical classes before context is applied.
enum class Lex {
  pron,
  demonstrative,
  wh,  // what / which / whose: determiner or pronoun by context
  one,
  det,
  adp,
  conj,
  aux,
  adv,
  intj,
  num,
  adj,
  verb,
  noun_verb,
  noun,
  unknown,
  punct,
  clitic,
};

const std::unordered_map<std::string, Lex>& lexicon() {
  static const std::unordered_map<std::string, Lex> table = [] {
    std::unordered_map<std::string, Lex> m;
    auto add = [&m](Lex lex, std::initializer_list<const char*> words) {
      for (const char* w : words) m.emplace(w, lex);
    };
    add(Lex::pron, {"i", "me", "myself", "you", "yourself", "yourselves", "we", "us",
                    "ourselves", "he", "him", "himself", "she", "her", "herself", "it",
                    "itself", "they", "them", "themselves", "his", "hers", "its", "their",
                    "theirs", "mine", "yours", "ours", "someone", "something", "anything",
                    "everything", "nothing", "anyone", "everyone", "somebody", "anybody",
                    "everybody", "nobody", "who", "whom"});
    add(Lex::demonstrative, {"this", "that", "these", "those"});
    add(Lex::wh, {"what", "which", "whose"});
    add(Lex::one, {"one", "ones"});
    add(Lex::det, {"a", "an", "the", "some", "any", "each", "every", "no", "all", "both",
                   "either", "neither", "another", "such", "many", "much", "few",
                   "several", "my", "your", "our", "enough"});
    add(Lex::adp, {"of", "to", "in", "on", "at", "for", "with", "by", "from", "about",
                   "into", "onto", "over", "under", "between", "through", "during",
                   "before", "after", "against", "without", "within", "among", "across",
                   "behind", "beyond", "near", "per", "via", "out", "up", "off", "down",
                   "around", "toward", "towards", "upon", "versus", "vs", "regarding",
                   "despite", "except", "inside", "outside", "along", "throughout",
                   "like", "beside", "besides", "concerning"});
    add(Lex::conj, {"and", "or", "but", "nor", "if", "because", "while", "although",
                    "though", "whether", "once", "since", "unless", "until", "than", "as",
                    "whereas", "so"});
    add(Lex::aux, {"am", "is", "are", "was", "were", "be", "been", "being", "do", "does",
                   "did", "have", "has", "had", "having", "can", "could", "will", "would",
                   "shall", "should", "may", "might", "must", "don't", "doesn't", "didn't",
                   "isn't", "aren't", "wasn't", "weren't", "can't", "won't", "wouldn't",
                   "shouldn't", "couldn't", "haven't", "hasn't", "hadn't"});
    add(Lex::adv, {"not", "very", "most", "more", "less", "least", "also", "just", "only",
                   "really", "too", "often", "still", "even", "then", "there", "here",
                   "now", "always", "never", "ever", "again", "already", "yet", "soon",
                   "how", "why", "where", "when", "well", "quite", "rather", "almost",
                   "usually", "generally", "actually", "maybe", "perhaps", "instead",
                   "else", "away", "back", "together", "later", "today", "currently", "ago",
                   "sometimes", "however", "therefore", "also"});
    add(Lex::intj, {"wow", "oh", "ah", "hi", "hello", "hey", "ok", "okay", "yes", "yeah",
                    "thanks", "thank", "please", "hmm", "cool", "alright", "sure"});
    add(Lex::adj,
        {"common", "better", "best", "good", "bad", "worse", "worst", "main", "different",
         "same", "other", "new", "old", "big", "small", "large", "high", "low", "important",
         "possible", "likely", "unlikely", "deadly", "safe", "dangerous", "healthy",
         "major", "minor", "typical", "general", "specific", "full", "long", "short",
         "early", "late", "free", "easy", "hard", "difficult", "true", "false", "real",
         "popular", "famous", "similar", "available", "necessary", "normal", "serious",
         "severe", "rare", "effective", "expensive", "cheap", "natural", "medical",
         "public", "private", "local", "national", "international", "federal", "economic",
         "social", "political", "financial", "legal", "official", "human", "first", "last",
         "next", "previous", "recent", "current", "certain", "whole", "own", "various",
         "strong", "weak", "fast", "slow", "hot", "cold", "young", "average", "total",
         "final", "key", "primary", "basic", "simple", "complex", "overall", "significant",
         "entire", "invasive", "benign", "malignant", "aggressive", "chronic", "acute",
         "harmful", "great", "interesting", "original", "traditional", "famous", "known",
         "best", "nice", "fine", "sure", "able", "likely", "biggest", "largest", "higher",
         "lower", "cheaper", "safer"});
    add(Lex::verb,
        {"think", "thought", "know", "knew", "mean", "meant", "want", "wants", "wanted",
         "get", "gets", "got", "go", "goes", "went", "gone", "make", "makes", "made", "take",
         "takes", "took", "taken", "give", "gives", "gave", "given", "find", "finds",
         "found", "tell", "told", "become", "becomes", "became", "seem", "seems", "seemed",
         "happen", "happens", "happened", "break", "breaks", "broke", "broken", "treat",
         "treats", "treated", "diagnose", "diagnosed", "prevent", "prevents", "prevented",
         "affect", "affects", "affected", "reduce", "reduces", "reduced", "compare",
         "compared", "begin", "begins", "began", "grow", "grows", "grew", "live", "lives",
         "lived", "eat", "eats", "ate", "needed", "include", "includes", "included",
         "involve", "involves", "require", "requires", "required", "differ", "differs",
         "occur", "occurs", "recommend", "suggest", "explain", "describe", "described",
         "called", "call", "caused", "considered", "consider", "learn", "buy", "sell",
         "survive", "recover", "die", "dies", "died", "kill", "kills", "killed", "lead",
         "leads", "led", "apply", "applies", "applied", "feel", "feels", "felt", "look",
         "looks", "keep", "keeps", "stop", "stops", "try", "tried", "say", "says", "said",
         "used", "remove", "removed", "detect", "detected", "spreads", "spread", "invest",
         "visit", "visited", "open", "opened", "see", "saw", "seen", "mentioned",
         "heard", "hear", "read", "wrote", "write", "lose", "lost", "win", "won",
         "recommended", "allowed", "allow", "allows", "run", "runs", "ran"});
    add(Lex::noun_verb,
        {"cause", "causes", "need", "needs", "use", "uses", "work", "works", "help", "helps",
         "change", "changes", "test", "tests", "cost", "costs", "cure", "cures", "permit",
         "permits", "increase", "increases", "start", "starts", "check", "checks", "report",
         "reports", "result", "results", "risk", "risks", "study", "studies", "plan",
         "plans", "process", "control", "rule", "rules", "license", "licenses", "spread",
         "form", "forms", "show", "shows", "pay", "drink", "drinks", "love", "cut", "cuts",
         "move", "moves", "travel", "support", "claim", "claims", "return", "returns"});
    // "spread" is listed twice on purpose: emplace keeps the verb entry.
    return m;
  }();
  return table;
}

bool is_subject_pronoun(std::string_view lower) {
  static const std::set<std::string, std::less<>> s{"i", "you", "he", "she", "it", "we", "they",
                                                    "who"};
  return s.count(lower) != 0;
}

bool is_sentence_break(std::string_view punct) {
  return punct == "." || punct == "?" || punct == "!" || punct == ":" || punct == ";" ||
         punct == "\"" || punct == "\xE2\x80\x9C";
}

bool all_caps(std::string_view w) {
  if (w.size() < 2) return false;
  bool any_alpha = false;
  for (char c : w) {
    if (std::islower(static_cast<unsigned char>(c))) return false;
    if (std::isalpha(static_cast<unsigned char>(c))) any_alpha = true;
  }
  return any_alpha;
}

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() > suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

bool adjectival_suffix(std::string_view w) {
  for (std::string_view suf : {"ous", "ful", "ive", "able", "ible", "al", "ic", "less", "ish"})
    if (w.size() >= suf.size() + 3 && ends_with(w, suf)) return true;
  return false;
}

struct Slot {
  text::RawToken raw;
  std::string lower;
  Lex lex = Lex::unknown;
  bool sentence_initial = false;
};

bool noun_ish(Lex lex) {
  return lex == Lex::noun || lex == Lex::unknown || lex == Lex::noun_verb;
}

}  // namespace

std::string_view to_string(Pos pos) {
  switch (pos) {
    case Pos::noun: return "NOUN";
    case Pos::verb: return "VERB";
    case Pos::adj: return "ADJ";
    case Pos::adp: return "ADP";
    case Pos::pron: return "PRON";
    case Pos::det: return "DET";
    case Pos::other: return "OTHER";
  }
  return "OTHER";
}

std::string_view to_string(WordKind kind) { return kind == WordKind::noun ? "noun" : "verb"; }

std::vector<TaggedToken> LexiconTagger::tag(std::string_view input) const {
  const auto raw = text::tokenize(input);
  std::vector<Slot> slots;
  slots.reserve(raw.size());

  bool at_start = true;
  for (const auto& tok : raw) {
    Slot s{tok, text::to_lower(tok.text)};
    if (tok.kind == text::TokenKind::punct) {
      s.lex = Lex::punct;
      if (is_sentence_break(tok.text)) at_start = true;
      slots.push_back(std::move(s));
      continue;
    }
    if (tok.kind == text::TokenKind::clitic) {
      s.lex = Lex::clitic;
      slots.push_back(std::move(s));
      continue;
    }
    s.sentence_initial = at_start;
    at_start = false;
    const bool capitalized = std::isupper(static_cast<unsigned char>(tok.text.front()));
    if (std::isdigit(static_cast<unsigned char>(tok.text.front()))) {
      s.lex = Lex::num;
    } else if (all_caps(tok.text) && s.lower != "ok") {
      s.lex = Lex::noun;
    } else {
      auto it = lexicon().find(s.lower);
      s.lex = it == lexicon().end() ? Lex::unknown : it->second;
      // Mid-sentence capitals on open-class words mark names.
      if (capitalized && !s.sentence_initial && s.lower != "i" &&
          (s.lex == Lex::unknown || s.lex == Lex::adj || s.lex == Lex::verb ||
           s.lex == Lex::noun_verb))
        s.lex = Lex::noun;
      if (capitalized && s.sentence_initial && s.lex == Lex::unknown) s.lex = Lex::noun;
    }
    slots.push_back(std::move(s));
  }

  std::vector<TaggedToken> out;
  out.reserve(slots.size());
  auto lex_at = [&](std::size_t i) { return i < slots.size() ? slots[i].lex : Lex::punct; };
  // Index of the previous token, skipping adverbs; npos at the start.
  auto prev_index = [&](std::size_t i) {
    while (i > 0) {
      --i;
      if (slots[i].lex != Lex::adv) return i;
    }
    return std::string::npos;
  };
  // A determiner-like word is followed by a noun, optionally via one adjective.
  auto heads_noun_phrase = [&](std::size_t i) {
    Lex n1 = lex_at(i + 1);
    if (noun_ish(n1) || n1 == Lex::num) return true;
    return n1 == Lex::adj && noun_ish(lex_at(i + 2));
  };

  for (std::size_t i = 0; i < slots.size(); ++i) {
    const Slot& s = slots[i];
    Pos pos = Pos::other;
    const std::size_t pi = prev_index(i);
    const Lex prev = pi == std::string::npos ? Lex::punct : slots[pi].lex;
    const Pos prev_pos = pi == std::string::npos ? Pos::other : out[pi].pos;
    const std::string_view prev_lower =
        pi == std::string::npos ? std::string_view{} : std::string_view(slots[pi].lower);
    const bool subject_before =
        (prev == Lex::pron && is_subject_pronoun(prev_lower)) || prev == Lex::aux;

    switch (s.lex) {
      case Lex::punct:
      case Lex::clitic:
      case Lex::conj:
      case Lex::aux:
      case Lex::adv:
      case Lex::intj:
      case Lex::num: pos = Pos::other; break;
      case Lex::pron: pos = Pos::pron; break;
      case Lex::det: pos = Pos::det; break;
      case Lex::adp: pos = Pos::adp; break;
      case Lex::adj: pos = Pos::adj; break;
      case Lex::noun: pos = Pos::noun; break;
      case Lex::verb: pos = Pos::verb; break;
      case Lex::demonstrative: {
        const Lex next = lex_at(i + 1);
        if (heads_noun_phrase(i)) {
          pos = Pos::det;
        } else if (s.lower == "that" &&
                   ((prev_pos == Pos::noun && (next == Lex::verb || next == Lex::aux ||
                                               next == Lex::noun_verb)) ||
                    next == Lex::pron || next == Lex::det || next == Lex::demonstrative)) {
          pos = Pos::other;  // relative pronoun or complementizer
        } else {
          pos = Pos::pron;
        }
        break;
      }
      case Lex::wh: pos = heads_noun_phrase(i) ? Pos::det : Pos::pron; break;
      case Lex::one:
        if (s.lower == "ones") {
          pos = heads_noun_phrase(i) ? Pos::other : Pos::pron;
        } else if (lex_at(i + 1) == Lex::adp || heads_noun_phrase(i)) {
          pos = Pos::other;
        } else {
          pos = (prev_pos == Pos::det || prev_pos == Pos::adj) ? Pos::pron : Pos::other;
        }
        break;
      case Lex::noun_verb:
        if (s.sentence_initial || subject_before || (prev == Lex::wh && prev_pos == Pos::pron) ||
            (prev == Lex::adp && prev_lower == "to")) {
          pos = Pos::verb;
        } else if (prev == Lex::conj && (prev_lower == "and" || prev_lower == "or") &&
                   pi != std::string::npos) {
          std::size_t before = prev_index(pi);
          pos = before != std::string::npos && out[before].pos == Pos::verb ? Pos::verb
                                                                            : Pos::noun;
        } else {
          pos = Pos::noun;
        }
        break;
      case Lex::unknown: {
        const std::string& w = s.lower;
        const Lex next = lex_at(i + 1);
        if (ends_with(w, "ly") && w.size() > 4) {
          pos = Pos::other;
        } else if (adjectival_suffix(w)) {
          pos = (prev == Lex::aux || prev_lower == "very" || prev_lower == "so" ||
                 prev_lower == "how" || prev_lower == "more" || prev_lower == "most" ||
                 prev_lower == "too" || noun_ish(next))
                    ? Pos::adj
                    : Pos::noun;
        } else if (ends_with(w, "ed") && w.size() > 4) {
          pos = subject_before ? Pos::verb : noun_ish(next) ? Pos::adj : Pos::verb;
        } else if (ends_with(w, "ing") && w.size() > 4) {
          pos = subject_before ? Pos::verb : Pos::noun;
        } else {
          pos = Pos::noun;
        }
        break;
      }
    }
    out.push_back({std::string(s.raw.text), s.lower, pos, s.raw.start, s.raw.end});
  }
  return out;
}

std::vector<TaggedToken> tokenize_and_tag(std::string_view text) {
  static const LexiconTagger tagger;
  return tagger.tag(text);
}

PronounInventory PronounInventory::standard() {
  return PronounInventory({"he", "him", "she", "her", "it", "they", "them", "his", "hers", "its",
                           "their", "theirs", "this", "that", "these", "those", "one",
                           "ones"});
}

PronounInventory PronounInventory::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pronoun inventory " + path);
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto w = text::trim(line);
    if (w.empty() || w.front() == '#') continue;
    words.insert(text::to_lower(w));
  }
  return PronounInventory(std::move(words));
}

bool PronounInventory::contains(std::string_view lemma) const {
  return words_.count(std::string(lemma)) != 0;
}

std::vector<PronounMention> detect_pronouns(const std::vector<TaggedToken>& tokens,
                                            const PronounInventory& inventory) {
  static const std::set<std::string, std::less<>> possessive{"his", "hers", "its", "their",
                                                             "theirs"};
  std::vector<PronounMention> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.pos != Pos::pron || !inventory.contains(t.lemma)) continue;
    bool poss = possessive.count(t.lemma) != 0;
    if (t.lemma == "her" && i + 1 < tokens.size()) {
      Pos next = tokens[i + 1].pos;
      poss = next == Pos::noun || next == Pos::adj;
    }
    out.push_back({i, t.text, poss});
  }
  return out;
}

OmissionRules omission_rules(const Config& config) {
  return {config.omission_strictness, config.premodifier_idf_threshold};
}

namespace {

bool is_clause_boundary(const TaggedToken& t) {
  static const std::set<std::string, std::less<>> words{
      "and", "or", "but", "because", "if", "while", "although", "though", "whether", "once",
      "since", "unless", "until", "whereas", "so", "what", "which", "who", "how", "why",
      "where", "when", ".", ",", ";", ":", "?", "!"};
  return words.count(t.lemma) != 0;
}

bool is_sentence_end(const TaggedToken& t) {
  return t.lemma == "." || t.lemma == "?" || t.lemma == "!";
}

bool blocks(const TaggedToken& next, WordKind kind, OmissionStrictness strictness) {
  if (next.pos != Pos::adp) return false;
  if (strictness == OmissionStrictness::strict) return true;
  return next.lemma == (kind == WordKind::noun ? "of" : "to");
}

}  // namespace

std::vector<OmissionCandidate> find_omission_candidates(const std::vector<TaggedToken>& tokens,
                                                        const IdfTable& idf, double threshold,
                                                        const OmissionRules& rules) {
  std::vector<OmissionCandidate> out;
  const std::size_t n = tokens.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = tokens[i];
    if (t.pos != Pos::noun && t.pos != Pos::verb) continue;
    const double score = idf.idf(t.lemma);
    if (!(score > threshold)) continue;
    const TaggedToken* next = i + 1 < n ? &tokens[i + 1] : nullptr;

    if (t.pos == Pos::noun) {
      // Mid-sentence capitalised nouns are names; a name already identifies its referent.
      const bool sentence_initial = i == 0 || is_sentence_end(tokens[i - 1]);
      if (!sentence_initial && std::isupper(static_cast<unsigned char>(t.text.front()))) continue;
      if (next) {
        if (next->pos == Pos::noun || next->lemma == "'s" || next->lemma == "\xE2\x80\x99s")
          continue;  // modifier inside a larger noun phrase
        if (blocks(*next, WordKind::noun, rules.strictness)) continue;
        if ((next->lemma == "and" || next->lemma == "or") && i + 2 < n) {
          // Non-final conjunct: the description belongs after the last one.
          std::size_t j = i + 2;
          while (j < n && (tokens[j].pos == Pos::det || tokens[j].pos == Pos::adj)) ++j;
          if (j < n && tokens[j].pos == Pos::noun) continue;
        }
      }
      bool described = false;
      for (std::size_t j = i; j-- > 0;) {
        const auto& pre = tokens[j];
        if (pre.pos == Pos::noun) continue;
        if (pre.pos != Pos::adj) break;
        if (idf.idf(pre.lemma) > rules.premodifier_idf_threshold) {
          described = true;
          break;
        }
      }
      if (described) continue;
      out.push_back({i, t.text, WordKind::noun, score});
    } else {
      if (next && blocks(*next, WordKind::verb, rules.strictness)) continue;
      bool has_object = false;
      for (std::size_t j = i + 1; j < n && !is_clause_boundary(tokens[j]); ++j) {
        if (tokens[j].pos == Pos::noun) {
          has_object = true;
          break;
        }
      }
      if (has_object) continue;
      out.push_back({i, t.text, WordKind::verb, score});
    }
  }
  return out;
}

}  // namespace zeqr
