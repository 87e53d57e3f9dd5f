#pragma once

// The reading-comprehension seam. A Reader receives a question and a
// context and returns a span of the context, or nothing.

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "zeqr/datamodel.hpp"

namespace zeqr {

inline constexpr std::string_view kSeparator = "<SEP>";

struct ReaderInput {
  std::string question;
  std::string context;
  std::string formatted;  // question + " <SEP> " + context
  bool truncated = false;
};

struct SpanAnswer {
  std::string text;
  std::size_t char_start = 0;  // UTF-8 byte offsets into ReaderInput::context
  std::size_t char_end = 0;
  double score = 0.0;

  bool operator==(const SpanAnswer&) const = default;
};

// Serializes the context and joins it to the question with the separator,
// trimming the context tail until the whole input fits reader_max_tokens.
// The question is never shortened; PreconditionError if it alone overflows
// the budget or is empty.
ReaderInput build_reader_input(std::string_view question, const DialogueContext& context,
                               const Config& config);

class Reader {
 public:
  virtual ~Reader() = default;
  virtual std::string name() const = 0;
  // Best span or nullopt. Called only with a non-empty context; must be
  // safe to call concurrently.
  virtual std::optional<SpanAnswer> answer(const ReaderInput& input) const = 0;
};

// Runs `reader` on `input` and checks the span against the context.
// Throws NoContextError on an empty context and ProtocolError when the
// backend returns a span that is not a slice of the context.
std::optional<SpanAnswer> extract_span(const Reader& reader, const ReaderInput& input);

// Fixture backend: question -> answer text. Keys are either full questions
// or the question stem before `, in "`. The answer is located in the
// context (exact match first, then case-insensitive); answers that are not
// in the context yield nothing.
class OracleReader final : public Reader {
 public:
  struct Entry {
    std::string answer;
    double score = 1.0;
  };
  explicit OracleReader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}
  OracleReader(std::initializer_list<std::pair<const std::string, std::string>> answers);
  // JSON object: {"question": "answer"} or {"question": {"answer": ..., "score": ...}}.
  static OracleReader from_json(std::string_view json);
  static OracleReader load(const std::string& path);

  std::string name() const override { return "oracle"; }
  std::optional<SpanAnswer> answer(const ReaderInput& input) const override;

 private:
  std::map<std::string, Entry> entries_;
};

// Always answers with the whole context.
class EchoReader final : public Reader {
 public:
  std::string name() const override { return "echo"; }
  std::optional<SpanAnswer> answer(const ReaderInput& input) const override;
};

struct RemoteOptions {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{100};
  std::chrono::seconds timeout{30};
  int max_concurrency = 4;
};

// HTTP backend: POST {base}/extract with {"question", "context"}; expects
// {"answer", "start", "end", "score"} with code point offsets into context.
// Retries transport failures and 5xx with exponential backoff.
class RemoteReader final : public Reader {
 public:
  explicit RemoteReader(std::string base_url, RemoteOptions options = {});
  ~RemoteReader() override;

  std::string name() const override { return "remote:" + base_url_; }
  std::optional<SpanAnswer> answer(const ReaderInput& input) const override;

 private:
  struct Limiter;
  std::string base_url_;
  RemoteOptions options_;
  std::unique_ptr<Limiter> limiter_;
};

// Wraps a text generator. The generator is told to copy a span of the
// context verbatim; output that is not a contiguous slice of the context is
// rejected.
class GenerativeReader final : public Reader {
 public:
  using Generator = std::function<std::string(const std::string& prompt)>;
  explicit GenerativeReader(Generator generator, std::string label = "generative")
      : generator_(std::move(generator)), label_(std::move(label)) {}
  // Generator backed by POST {base}/generate {"prompt"} -> {"text"}.
  static GenerativeReader http(std::string base_url, RemoteOptions options = {});

  static std::string prompt_for(const ReaderInput& input);

  std::string name() const override { return label_; }
  std::optional<SpanAnswer> answer(const ReaderInput& input) const override;

 private:
  Generator generator_;
  std::string label_;
};

// "oracle:<file.json>", "echo", "remote:<url>" (or a bare http:// url),
// "generative:<url>".
std::unique_ptr<Reader> make_reader(const std::string& spec);

// Offsets of `needle` in `context`: exact first, then ASCII case-insensitive.
std::optional<SpanAnswer> locate_span(std::string_view context, std::string_view needle,
                                      double score);

}  // namespace zeqr
