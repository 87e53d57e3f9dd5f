#include <doctest.h>

#include <atomic>
#include <random>

#include <json.hpp>

#include "../support/fixtures.hpp"
#include "zeqr/error.hpp"
#include "zeqr/reader.hpp"
#include "zeqr/text.hpp"

using namespace zeqr;
using nlohmann::json;

namespace {

DialogueContext ctx_of(std::vector<std::string> queries, std::optional<std::string> answer = std::nullopt) {
  return {std::move(queries), std::move(answer), false};
}

RemoteOptions fast() {
  RemoteOptions o;
  o.initial_backoff = std::chrono::milliseconds(1);
  o.timeout = std::chrono::seconds(5);
  return o;
}

// Reader that returns whatever span it was built with.
class FixedReader final : public Reader {
 public:
  explicit FixedReader(SpanAnswer s) : span_(std::move(s)) {}
  std::string name() const override { return "fixed"; }
  std::optional<SpanAnswer> answer(const ReaderInput&) const override { return span_; }

 private:
  SpanAnswer span_;
};

}  // namespace

TEST_CASE("reader input joins question and context with the separator") {
  auto in = build_reader_input("What is that refer to, in \"x\"", ctx_of({"q one", "q two"}, "the answer"),
                               Config{});
  CHECK(in.context == "q one q two the answer");
  CHECK(in.formatted == "What is that refer to, in \"x\" <SEP> q one q two the answer");
  CHECK_FALSE(in.truncated);
}

TEST_CASE("the context tail is trimmed to the token budget") {
  Config c;
  c.reader_max_tokens = 10;
  auto in = build_reader_input("one two three", ctx_of({"a b c d e f g h i j k"}), c);
  CHECK(in.truncated);
  // "<SEP>" is three tokens to the shared tokenizer.
  CHECK(in.context == "a b c d");
  CHECK(text::count_tokens(in.formatted) == 10);
}

TEST_CASE("separator text inside the context is neutralised") {
  auto in = build_reader_input("q", ctx_of({"before <SEP> after"}), Config{});
  CHECK(in.context == "before <sep> after");
  CHECK(in.formatted.find("<SEP>") == in.formatted.rfind("<SEP>"));
}

TEST_CASE("bad questions are rejected") {
  Config c;
  CHECK_THROWS_AS(build_reader_input("  ", ctx_of({"x"}), c), PreconditionError);
  CHECK_THROWS_AS(build_reader_input("a <SEP> b", ctx_of({"x"}), c), PreconditionError);
  c.reader_max_tokens = 3;
  CHECK_THROWS_AS(build_reader_input("one two three", ctx_of({"x"}), c), PreconditionError);
}

TEST_CASE("property: formatted input never exceeds the budget") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    Config c;
    c.reader_max_tokens = 8 + static_cast<int>(rng() % 100);
    std::string ctx;
    for (int i = 0, n = static_cast<int>(rng() % 200); i < n; ++i) ctx += (rng() % 5 ? "word " : ", ");
    auto in = build_reader_input("what is it", ctx_of({ctx}), c);
    CHECK(text::count_tokens(in.formatted) <= static_cast<std::size_t>(c.reader_max_tokens));
    CHECK(ctx.rfind(in.context, 0) == 0);
  }
}

TEST_CASE("extract_span requires a context and a genuine slice") {
  OracleReader oracle{{"Who?", "Lobular Neoplasia"}};
  auto empty = build_reader_input("Who?", ctx_of({}), Config{});
  CHECK_THROWS_AS(extract_span(oracle, empty), NoContextError);

  auto in = build_reader_input("Who?", ctx_of({}, fixtures::kA3), Config{});
  auto span = extract_span(oracle, in);
  REQUIRE(span);
  CHECK(span->text == "Lobular Neoplasia");
  CHECK(in.context.substr(span->char_start, span->char_end - span->char_start) == span->text);

  FixedReader liar({"Lobular Neoplasm", 0, 16, 1.0});
  CHECK_THROWS_AS(extract_span(liar, in), ProtocolError);
  FixedReader outside({"x", 500, 501, 1.0});
  CHECK_THROWS_AS(extract_span(outside, in), ProtocolError);
}

TEST_CASE("oracle keys: full question, then stem") {
  OracleReader oracle{{"What is that refer to", "Lobular Neoplasia"},
                      {"treatments of what, in \"What are common treatments?\"", "lobular carcinoma in situ"}};
  auto ctx = ctx_of({fixtures::kQ3}, fixtures::kA3);
  auto a = oracle.answer(build_reader_input("What is that refer to, in \"anything\"", ctx, Config{}));
  REQUIRE(a);
  CHECK(a->text == "Lobular Neoplasia");
  // Case-insensitive fallback returns the context's own casing.
  auto b = oracle.answer(
      build_reader_input("treatments of what, in \"What are common treatments?\"", ctx, Config{}));
  REQUIRE(b);
  CHECK(b->text == "Lobular Carcinoma in Situ");
  CHECK_FALSE(oracle.answer(build_reader_input("unknown question", ctx, Config{})));
  // Answers that are not in the context are not answers.
  OracleReader absent{{"Who?", "Ductal carcinoma"}};
  CHECK_FALSE(absent.answer(build_reader_input("Who?", ctx, Config{})));
}

TEST_CASE("oracle fixtures load from JSON") {
  auto oracle = OracleReader::from_json(R"({"Who?": "Neoplasia", "Why?": {"answer": "risk", "score": 0.25}})");
  auto ctx = ctx_of({}, fixtures::kA3 + " more risk");
  auto why = oracle.answer(build_reader_input("Why?", ctx, Config{}));
  REQUIRE(why);
  CHECK(why->score == 0.25);
  CHECK_THROWS_AS(OracleReader::from_json("[1,2]"), ParseError);
  CHECK_THROWS_AS(OracleReader::from_json("{\"a\": 3}"), ParseError);
  CHECK_THROWS_AS(OracleReader::from_json("{"), ParseError);
  CHECK_THROWS_AS(OracleReader::load("/nonexistent/oracle.json"), IoError);
}

TEST_CASE("echo returns the whole context") {
  EchoReader echo;
  auto in = build_reader_input("q", ctx_of({"a b"}, "c"), Config{});
  auto span = extract_span(echo, in);
  REQUIRE(span);
  CHECK(span->text == "a b c");
}

TEST_CASE("reader specs") {
  CHECK(make_reader("echo")->name() == "echo");
  CHECK(make_reader("remote:http://localhost:9/x")->name() == "remote:http://localhost:9/x");
  CHECK(make_reader("http://localhost:9")->name() == "remote:http://localhost:9");
  CHECK(make_reader("generative:http://localhost:9")->name() == "generative:http://localhost:9");
  CHECK_THROWS_AS(make_reader("bert"), PreconditionError);
  CHECK_THROWS_AS(make_reader("oracle:/nonexistent.json"), IoError);
}

TEST_CASE("remote reader converts code point offsets") {
  fixtures::TestServer server([](httplib::Server& s) {
    s.Post("/extract", [](const httplib::Request& req, httplib::Response& res) {
      auto body = json::parse(req.body);
      CHECK(body["question"] == "Where?");
      const std::string ctx = body["context"];
      // "Café Zürich" starts after "Visit the " = 10 code points.
      res.set_content(json{{"answer", "Café Zürich"}, {"start", 10}, {"end", 21}, {"score", 0.75}}.dump(),
                      "application/json");
      (void)ctx;
    });
  });
  RemoteReader reader(server.url(), fast());
  auto in = build_reader_input("Where?", ctx_of({"Visit the Café Zürich today"}), Config{});
  auto span = extract_span(reader, in);
  REQUIRE(span);
  CHECK(span->text == "Café Zürich");
  CHECK(span->char_start == 10);
  CHECK(span->char_end == 23);  // two 2-byte characters
  CHECK(span->score == 0.75);
}

TEST_CASE("remote reader: empty span means no answer") {
  fixtures::TestServer server([](httplib::Server& s) {
    s.Post("/extract", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"answer": "", "start": 0, "end": 0, "score": 0.0})", "application/json");
    });
  });
  RemoteReader reader(server.url(), fast());
  CHECK_FALSE(reader.answer(build_reader_input("q", ctx_of({"ctx"}), Config{})));
}

TEST_CASE("remote reader retries server errors") {
  std::atomic<int> calls{0};
  fixtures::TestServer server([&calls](httplib::Server& s) {
    s.Post("/extract", [&calls](const httplib::Request&, httplib::Response& res) {
      if (++calls < 3) {
        res.status = 503;
        return;
      }
      res.set_content(R"({"answer": "ctx", "start": 0, "end": 3, "score": 1.0})", "application/json");
    });
  });
  RemoteReader reader(server.url(), fast());
  auto span = reader.answer(build_reader_input("q", ctx_of({"ctx"}), Config{}));
  REQUIRE(span);
  CHECK(calls == 3);
}

TEST_CASE("remote reader gives up after max attempts") {
  std::atomic<int> calls{0};
  fixtures::TestServer server([&calls](httplib::Server& s) {
    s.Post("/extract", [&calls](const httplib::Request&, httplib::Response& res) {
      ++calls;
      res.status = 500;
    });
  });
  RemoteReader reader(server.url(), fast());
  try {
    reader.answer(build_reader_input("q", ctx_of({"ctx"}), Config{}));
    FAIL("expected a transport error");
  } catch (const TransportError& e) {
    CHECK(e.attempts() == 3);
    CHECK(e.endpoint() == server.url());
  }
  CHECK(calls == 3);
}

TEST_CASE("remote reader: unreachable endpoint") {
  RemoteReader reader(fixtures::dead_url(), fast());
  CHECK_THROWS_AS(reader.answer(build_reader_input("q", ctx_of({"ctx"}), Config{})), TransportError);
}

TEST_CASE("remote reader: contract violations") {
  std::string reply;
  int status = 200;
  fixtures::TestServer server([&](httplib::Server& s) {
    s.Post("/extract", [&](const httplib::Request&, httplib::Response& res) {
      res.status = status;
      res.set_content(reply, "application/json");
    });
  });
  RemoteReader reader(server.url(), fast());
  auto in = build_reader_input("q", ctx_of({"some context"}), Config{});
  for (std::string bad : {std::string("not json"), std::string(R"({"answer": "some"})"),
                          std::string(R"({"answer": "other", "start": 0, "end": 5, "score": 1})"),
                          std::string(R"({"answer": "some", "start": 0, "end": 99, "score": 1})"),
                          std::string(R"({"answer": "some", "start": 3, "end": 1, "score": 1})")}) {
    CAPTURE(bad);
    reply = bad;
    CHECK_THROWS_AS(reader.answer(in), ProtocolError);
  }
  status = 400;
  reply = "{}";
  CHECK_THROWS_AS(reader.answer(in), ProtocolError);
}

TEST_CASE("generative reader accepts only extractive output") {
  auto ctx = ctx_of({}, "it will be described as Lobular Neoplasia in this case");
  auto in = build_reader_input("What is that refer to, in \"x\"", ctx, Config{});

  GenerativeReader quoted([](const std::string& prompt) {
    CHECK(prompt.find("Lobular Neoplasia") != std::string::npos);
    return std::string("\"Lobular Neoplasia.\"");
  });
  auto span = extract_span(quoted, in);
  REQUIRE(span);
  CHECK(span->text == "Lobular Neoplasia");

  GenerativeReader paraphrase([](const std::string&) { return std::string("a neoplasia of the lobules"); });
  CHECK_FALSE(paraphrase.answer(in));
}

TEST_CASE("generative reader over HTTP") {
  fixtures::TestServer server([](httplib::Server& s) {
    s.Post("/generate", [](const httplib::Request& req, httplib::Response& res) {
      CHECK(json::parse(req.body).contains("prompt"));
      res.set_content(R"({"text": "Lobular Neoplasia"})", "application/json");
    });
  });
  auto reader = GenerativeReader::http(server.url(), fast());
  auto span = reader.answer(build_reader_input("q", ctx_of({}, fixtures::kA3), Config{}));
  REQUIRE(span);
  CHECK(span->text == "Lobular Neoplasia");
}

TEST_CASE("property: oracle spans always slice the context") {
  std::mt19937 rng(23);
  const std::vector<std::string> words{"alpha", "Beta", "gamma", "délta", "Ω", "x-y", ",", "."};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> picked;
    for (int i = 0; i < 20; ++i) picked.push_back(words[rng() % words.size()]);
    std::string ctx;
    for (const auto& w : picked) ctx += w + " ";
    const std::size_t from = rng() % 18, to = from + 1 + rng() % 3;
    std::string needle;
    for (std::size_t i = from; i < to; ++i) needle += (needle.empty() ? "" : " ") + picked[i];
    if (rng() % 2) needle = text::to_lower(needle);
    OracleReader oracle{{"q", needle}};
    auto in = build_reader_input("q", ctx_of({ctx}), Config{});
    auto span = oracle.answer(in);
    REQUIRE(span);
    CHECK(in.context.substr(span->char_start, span->char_end - span->char_start) == span->text);
    CHECK(text::iequals(span->text, needle));
  }
}
