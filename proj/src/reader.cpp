#include "zeqr/reader.hpp"

#include <condition_variable>
#include <fstream>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "http_client.hpp"
#include "zeqr/error.hpp"
#include "zeqr/text.hpp"

namespace zeqr {

using nlohmann::json;

ReaderInput build_reader_input(std::string_view question, const DialogueContext& context,
                               const Config& config) {
  if (text::trim(question).empty()) throw PreconditionError("reader question is empty");
  if (question.find(kSeparator) != std::string_view::npos)
    throw PreconditionError("reader question contains the separator sentinel");

  ReaderInput in;
  in.question = std::string(question);
  in.context = serialize_context(context);
  // The separator must appear exactly once.
  for (auto pos = in.context.find(kSeparator); pos != std::string::npos;
       pos = in.context.find(kSeparator, pos))
    in.context.replace(pos, kSeparator.size(), "<sep>");

  const std::size_t budget = static_cast<std::size_t>(config.reader_max_tokens);
  const std::size_t fixed = text::count_tokens(in.question + " " + std::string(kSeparator) + " ");
  if (fixed > budget)
    throw PreconditionError("question alone needs " + std::to_string(fixed) +
                            " tokens, over the reader budget of " + std::to_string(budget));
  std::string_view kept = text::truncate_tokens(in.context, budget - fixed);
  if (kept.size() < in.context.size()) {
    in.context = std::string(text::trim(kept));
    in.truncated = true;
  }
  in.formatted = in.question + " " + std::string(kSeparator) + " " + in.context;
  return in;
}

std::optional<SpanAnswer> extract_span(const Reader& reader, const ReaderInput& input) {
  if (text::trim(input.context).empty()) throw NoContextError("reader called with an empty context");
  auto span = reader.answer(input);
  if (!span) return span;
  if (span->char_start >= span->char_end || span->char_end > input.context.size() ||
      input.context.compare(span->char_start, span->char_end - span->char_start, span->text) != 0)
    throw ProtocolError(reader.name() + " returned a span that is not a slice of the context: '" +
                        span->text + "'");
  return span;
}

std::optional<SpanAnswer> locate_span(std::string_view context, std::string_view needle,
                                      double score) {
  needle = text::trim(needle);
  if (needle.empty()) return std::nullopt;
  auto pos = context.find(needle);
  if (pos == std::string_view::npos) pos = text::ifind(context, needle);
  if (pos == std::string_view::npos) return std::nullopt;
  return SpanAnswer{std::string(context.substr(pos, needle.size())), pos, pos + needle.size(),
                    score};
}

OracleReader::OracleReader(
    std::initializer_list<std::pair<const std::string, std::string>> answers) {
  for (const auto& [q, a] : answers) entries_.emplace(q, Entry{a, 1.0});
}

OracleReader OracleReader::from_json(std::string_view source) {
  json root;
  try {
    root = json::parse(source);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid oracle JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("oracle fixture must be a JSON object");
  std::map<std::string, Entry> entries;
  for (const auto& [question, value] : root.items()) {
    if (value.is_string()) {
      entries.emplace(question, Entry{value.get<std::string>(), 1.0});
    } else if (value.is_object() && value.contains("answer") && value["answer"].is_string()) {
      entries.emplace(question, Entry{value["answer"].get<std::string>(),
                                      value.value("score", 1.0)});
    } else {
      throw ParseError("oracle entry for '" + question + "' must be a string or {answer, score}");
    }
  }
  return OracleReader(std::move(entries));
}

OracleReader OracleReader::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open oracle fixture " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::optional<SpanAnswer> OracleReader::answer(const ReaderInput& input) const {
  auto it = entries_.find(input.question);
  if (it == entries_.end()) {
    auto cut = input.question.find(", in \"");
    if (cut != std::string::npos) it = entries_.find(input.question.substr(0, cut));
  }
  if (it == entries_.end()) return std::nullopt;
  return locate_span(input.context, it->second.answer, it->second.score);
}

std::optional<SpanAnswer> EchoReader::answer(const ReaderInput& input) const {
  if (input.context.empty()) return std::nullopt;
  return SpanAnswer{input.context, 0, input.context.size(), 1.0};
}

struct RemoteReader::Limiter {
  std::mutex mu;
  std::condition_variable cv;
  int available;
  explicit Limiter(int n) : available(std::max(1, n)) {}
  void acquire() {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return available > 0; });
    --available;
  }
  void release() {
    {
      std::lock_guard lock(mu);
      ++available;
    }
    cv.notify_one();
  }
};

RemoteReader::RemoteReader(std::string base_url, RemoteOptions options)
    : base_url_(std::move(base_url)),
      options_(options),
      limiter_(std::make_unique<Limiter>(options.max_concurrency)) {}

RemoteReader::~RemoteReader() = default;

std::optional<SpanAnswer> RemoteReader::answer(const ReaderInput& input) const {
  json reply;
  limiter_->acquire();
  try {
    reply = detail::post_json(base_url_, "/extract",
                              {{"question", input.question}, {"context", input.context}},
                              {options_.max_attempts, options_.initial_backoff, options_.timeout});
  } catch (...) {
    limiter_->release();
    throw;
  }
  limiter_->release();

  if (!reply.is_object() || !reply.contains("answer") || !reply["answer"].is_string() ||
      !reply.contains("start") || !reply["start"].is_number_integer() ||
      !reply.contains("end") || !reply["end"].is_number_integer() ||
      !reply.contains("score") || !reply["score"].is_number())
    throw ProtocolError(name() + ": expected {answer, start, end, score}, got " + reply.dump());
  const auto answer = reply["answer"].get<std::string>();
  const auto start = reply["start"].get<long long>();
  const auto end = reply["end"].get<long long>();
  if (answer.empty() && start == end) return std::nullopt;
  if (start < 0 || end < start)
    throw ProtocolError(name() + ": invalid offsets " + std::to_string(start) + ".." +
                        std::to_string(end));
  const auto b_start = text::codepoint_to_byte(input.context, static_cast<std::size_t>(start));
  const auto b_end = text::codepoint_to_byte(input.context, static_cast<std::size_t>(end));
  if (b_start == std::string::npos || b_end == std::string::npos)
    throw ProtocolError(name() + ": offsets past the end of the context");
  if (input.context.compare(b_start, b_end - b_start, answer) != 0)
    throw ProtocolError(name() + ": answer '" + answer + "' does not match context[" +
                        std::to_string(start) + ":" + std::to_string(end) + "]");
  return SpanAnswer{answer, b_start, b_end, reply["score"].get<double>()};
}

GenerativeReader GenerativeReader::http(std::string base_url, RemoteOptions options) {
  auto label = "generative:" + base_url;
  return GenerativeReader(
      [base_url = std::move(base_url), options](const std::string& prompt) {
        json reply = detail::post_json(base_url, "/generate", {{"prompt", prompt}},
                                       {options.max_attempts, options.initial_backoff,
                                        options.timeout});
        if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string())
          throw ProtocolError("generative backend " + base_url + ": expected {\"text\": ...}");
        return reply["text"].get<std::string>();
      },
      std::move(label));
}

std::string GenerativeReader::prompt_for(const ReaderInput& input) {
  return "Answer the question by copying one contiguous span of the context word for word. "
         "Reply with the span only.\n\nQuestion: " +
         input.question + "\n\nContext: " + input.context + "\n\nSpan:";
}

std::optional<SpanAnswer> GenerativeReader::answer(const ReaderInput& input) const {
  std::string out(text::trim(generator_(prompt_for(input))));
  // Generators like to wrap the span in quotes or end it with a period.
  auto strip = [&out](std::string_view open, std::string_view close) {
    if (out.size() >= open.size() + close.size() && out.rfind(open, 0) == 0 &&
        out.compare(out.size() - close.size(), close.size(), close) == 0)
      out = out.substr(open.size(), out.size() - open.size() - close.size());
  };
  strip("\"", "\"");
  strip("\xE2\x80\x9C", "\xE2\x80\x9D");
  strip("'", "'");
  if (!out.empty() && out.back() == '.' && input.context.find(out) == std::string::npos)
    out.pop_back();
  return locate_span(input.context, out, 1.0);
}

std::unique_ptr<Reader> make_reader(const std::string& spec) {
  auto after = [&spec](std::string_view prefix) { return spec.substr(prefix.size()); };
  if (spec == "echo") return std::make_unique<EchoReader>();
  if (spec.rfind("oracle:", 0) == 0)
    return std::make_unique<OracleReader>(OracleReader::load(after("oracle:")));
  if (spec.rfind("remote:", 0) == 0) return std::make_unique<RemoteReader>(after("remote:"));
  if (spec.rfind("http://", 0) == 0) return std::make_unique<RemoteReader>(spec);
  if (spec.rfind("generative:", 0) == 0)
    return std::make_unique<GenerativeReader>(GenerativeReader::http(after("generative:")));
  throw PreconditionError("unknown reader spec '" + spec +
                          "' (expected oracle:<file>, echo, remote:<url>, generative:<url>)");
}

}  // namespace zeqr
