#pragma once

// Shared tokenization and normalization. The omission gate and the BM25
// searcher both go through normalize_terms() so that they agree on what a
// term is.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace zeqr::text {

enum class TokenKind { word, clitic, punct };

// Offsets are byte offsets into the UTF-8 source, end exclusive.
struct RawToken {
  std::string_view text;
  std::size_t start = 0;
  std::size_t end = 0;
  TokenKind kind = TokenKind::word;
};

// Splits on whitespace; words are runs of letters/digits (non-ASCII code
// points count as letters unless they are general punctuation), with
// internal apostrophes kept ("don't") except the possessive clitic, which
// becomes its own token ("City" "'s"). Every other character is a
// single-character punct token.
std::vector<RawToken> tokenize(std::string_view input);

std::string to_lower(std::string_view s);

// Lowercased word tokens only; clitics and punctuation are dropped.
std::vector<std::string> normalize_terms(std::string_view input);

// Token count used for reader budgets: words, clitics and punctuation all
// count as one.
std::size_t count_tokens(std::string_view input);

// Longest prefix of `input` holding at most `max_tokens` tokens, cut at a
// token end.
std::string_view truncate_tokens(std::string_view input, std::size_t max_tokens);

bool iequals(std::string_view a, std::string_view b);

// Case-insensitive (ASCII) substring search; npos when absent.
std::size_t ifind(std::string_view haystack, std::string_view needle,
                  std::size_t from = 0);

std::string_view trim(std::string_view s);

// Conversions between UTF-8 byte offsets and code point offsets.
std::size_t byte_to_codepoint(std::string_view s, std::size_t byte_offset);
std::size_t codepoint_to_byte(std::string_view s, std::size_t cp_offset);
std::size_t codepoint_length(std::string_view s);

// Shortest representation that parses back to the same double.
std::string format_double(double value);
// Whole-string parse; throws ParseError on garbage.
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

}  // namespace zeqr::text
