#include "zeqr/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "zeqr/error.hpp"

namespace zeqr::text {
namespace {

enum class CharClass { space, letter, apostrophe, punct };

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;  // stray continuation byte
}

char32_t decode(std::string_view s, std::size_t pos, std::size_t len) {
  auto b = [&](std::size_t i) { return static_cast<unsigned char>(s[pos + i]); };
  switch (len) {
    case 2: return ((b(0) & 0x1F) << 6) | (b(1) & 0x3F);
    case 3: return ((b(0) & 0x0F) << 12) | ((b(1) & 0x3F) << 6) | (b(2) & 0x3F);
    case 4:
      return ((b(0) & 0x07) << 18) | ((b(1) & 0x3F) << 12) | ((b(2) & 0x3F) << 6) |
             (b(3) & 0x3F);
    default: return b(0);
  }
}

CharClass classify(char32_t cp) {
  if (cp < 0x80) {
    auto c = static_cast<unsigned char>(cp);
    if (std::isspace(c)) return CharClass::space;
    if (std::isalnum(c)) return CharClass::letter;
    if (c == '\'') return CharClass::apostrophe;
    return CharClass::punct;
  }
  if (cp == 0x2019) return CharClass::apostrophe;
  if (cp == 0x00A0 || cp == 0x2007 || cp == 0x202F || cp == 0x3000 ||
      (cp >= 0x2000 && cp <= 0x200B))
    return CharClass::space;
  if ((cp >= 0x00A1 && cp <= 0x00BF) || cp == 0x00D7 || cp == 0x00F7 ||
      (cp >= 0x2010 && cp <= 0x206F) || (cp >= 0x3001 && cp <= 0x303F))
    return CharClass::punct;
  return CharClass::letter;
}

struct Cursor {
  std::string_view s;
  std::size_t pos = 0;

  bool done() const { return pos >= s.size(); }
  std::size_t width() const {
    return std::min(utf8_length(static_cast<unsigned char>(s[pos])), s.size() - pos);
  }
  CharClass peek_class() const { return classify(decode(s, pos, width())); }
  CharClass class_at(std::size_t p) const {
    Cursor c{s, p};
    return c.done() ? CharClass::space : c.peek_class();
  }
  std::size_t next_pos(std::size_t p) const {
    Cursor c{s, p};
    return p + c.width();
  }
};

}  // namespace

std::vector<RawToken> tokenize(std::string_view input) {
  std::vector<RawToken> out;
  Cursor cur{input};
  while (!cur.done()) {
    const std::size_t start = cur.pos;
    const CharClass cls = cur.peek_class();
    if (cls == CharClass::space) {
      cur.pos = cur.next_pos(cur.pos);
      continue;
    }
    if (cls != CharClass::letter) {
      // A possessive clitic directly after a word: "'s".
      if (cls == CharClass::apostrophe && !out.empty() &&
          out.back().kind == TokenKind::word && out.back().end == start) {
        std::size_t after = cur.next_pos(start);
        if (after < input.size() && (input[after] == 's' || input[after] == 'S') &&
            cur.class_at(after + 1) != CharClass::letter) {
          out.push_back({input.substr(start, after + 1 - start), start, after + 1,
                         TokenKind::clitic});
          cur.pos = after + 1;
          continue;
        }
      }
      cur.pos = cur.next_pos(start);
      out.push_back({input.substr(start, cur.pos - start), start, cur.pos,
                     TokenKind::punct});
      continue;
    }
    std::size_t end = cur.next_pos(start);
    while (end < input.size()) {
      CharClass c = cur.class_at(end);
      if (c == CharClass::letter) {
        end = cur.next_pos(end);
        continue;
      }
      if (c == CharClass::apostrophe) {
        std::size_t after = cur.next_pos(end);
        if (cur.class_at(after) != CharClass::letter) break;
        // Leave "'s" + boundary for the clitic branch.
        if ((input[after] == 's' || input[after] == 'S') &&
            cur.class_at(after + 1) != CharClass::letter)
          break;
        end = after;
        continue;
      }
      break;
    }
    out.push_back({input.substr(start, end - start), start, end, TokenKind::word});
    cur.pos = end;
  }
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> normalize_terms(std::string_view input) {
  std::vector<std::string> out;
  for (const auto& tok : tokenize(input)) {
    if (tok.kind == TokenKind::word) out.push_back(to_lower(tok.text));
  }
  return out;
}

std::size_t count_tokens(std::string_view input) { return tokenize(input).size(); }

std::string_view truncate_tokens(std::string_view input, std::size_t max_tokens) {
  auto toks = tokenize(input);
  if (toks.size() <= max_tokens) return input;
  if (max_tokens == 0) return input.substr(0, 0);
  return input.substr(0, toks[max_tokens - 1].end);
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && to_lower(a) == to_lower(b);
}

std::size_t ifind(std::string_view haystack, std::string_view needle, std::size_t from) {
  if (needle.empty()) return from <= haystack.size() ? from : std::string_view::npos;
  return to_lower(haystack).find(to_lower(needle), from);
}

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)); };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::size_t byte_to_codepoint(std::string_view s, std::size_t byte_offset) {
  std::size_t cps = 0;
  for (std::size_t i = 0; i < byte_offset && i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) ++cps;
  }
  return cps;
}

std::size_t codepoint_to_byte(std::string_view s, std::size_t cp_offset) {
  std::size_t cps = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
      if (cps == cp_offset) return i;
      ++cps;
    }
  }
  if (cps == cp_offset) return s.size();
  return std::string_view::npos;
}

std::size_t codepoint_length(std::string_view s) { return byte_to_codepoint(s, s.size()); }

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
    throw ParseError("not a number: '" + std::string(s) + "'");
  return v;
}

long long parse_int(std::string_view s) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
    throw ParseError("not an integer: '" + std::string(s) + "'");
  return v;
}

}  // namespace zeqr::text
