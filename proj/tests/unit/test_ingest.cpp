#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "zeqr/error.hpp"
#include "zeqr/ingest.hpp"

using namespace zeqr;

namespace {

std::vector<Document> parse(const std::string& s) {
  std::istringstream in(s);
  return parse_collection(in);
}

}  // namespace

TEST_CASE("collection lines") {
  auto docs = parse("{\"id\":\"d1\",\"contents\":\"alpha beta\"}\n\n{\"id\":\"d2\",\"contents\":\"beta\"}\n");
  REQUIRE(docs.size() == 2);
  CHECK(docs[1].doc_id == "d2");
  CHECK_THROWS_AS(parse("{\"id\":\"d1\",\"contents\":\"x\"}\n{\"id\":\"d1\",\"contents\":\"y\"}\n"),
                  ParseError);
  CHECK_THROWS_AS(parse("{\"id\":\"d1\",\"contents\":\"\"}\n"), ParseError);
  try {
    parse("{\"id\":\"d1\",\"contents\":\"x\"}\nnot json\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("topics resolve canonical passages against the collection") {
  const std::vector<Document> docs{{"p1", "passage one"}, {"p2", "passage two"}};
  const std::string json = R"([{"number": 81, "turn": [
      {"number": 1, "raw_utterance": "How do cats purr?", "canonical_result_id": "p2"},
      {"number": 2, "raw_utterance": "Do they enjoy it?", "canonical_passage": "inline text"},
      {"number": 3, "raw_utterance": "Why?"}]}])";
  auto sessions = parse_topics(json, &docs);
  REQUIRE(sessions.size() == 1);
  const auto& s = sessions[0];
  CHECK(s.session_id == "81");
  REQUIRE(s.turns.size() == 3);
  CHECK(s.turns[0].canonical_answer == std::optional<std::string>("passage two"));
  CHECK(s.turns[0].canonical_answer_id == std::optional<std::string>("p2"));
  CHECK(s.turns[1].canonical_answer == std::optional<std::string>("inline text"));
  CHECK_FALSE(s.turns[2].canonical_answer);

  auto again = parse_topics(serialize_topics(sessions));
  CHECK(again == sessions);
}

TEST_CASE("unknown canonical ids are named in the error") {
  const std::vector<Document> docs{{"p1", "x"}};
  const std::string json =
      R"([{"number": 1, "turn": [{"number": 1, "raw_utterance": "q", "canonical_result_id": "MARCO_9"}]}])";
  try {
    parse_topics(json, &docs);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("MARCO_9") != std::string::npos);
  }
  auto without = parse_topics(json);
  CHECK(without[0].turns[0].canonical_answer_id == std::optional<std::string>("MARCO_9"));
  CHECK_FALSE(without[0].turns[0].canonical_answer);
}

TEST_CASE("malformed topics") {
  CHECK_THROWS_AS(parse_topics("{}"), ParseError);
  CHECK_THROWS_AS(parse_topics("[{\"number\": 1}]"), ParseError);
  CHECK_THROWS_AS(parse_topics("[{\"number\": 1, \"turn\": [{\"number\": 2, \"raw_utterance\": \"q\"}]}]"),
                  Error);
}

TEST_CASE("qrels parsing") {
  std::istringstream in("31_1 0 d1 2\n31_1 0 d2 0\n31_1 0 d1 1\n\n32_4 Q0 d9 3\n");
  auto q = parse_qrels(in);
  CHECK(q.grade("31_1", "d1") == 1);  // last grade wins
  CHECK(q.grade("31_1", "d2") == 0);
  CHECK(q.grade("31_1", "nope") == 0);
  CHECK(q.grade("32_4", "d9") == 3);
  CHECK(q.has_query("32_4"));
  CHECK_FALSE(q.has_query("33_1"));
  CHECK(q.size() == 3);

  std::istringstream bad("31_1 0 d1 2\n31_1 0 d2\n");
  try {
    parse_qrels(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::istringstream bad_grade("31_1 0 d1 high\n");
  CHECK_THROWS_AS(parse_qrels(bad_grade), ParseError);
}

TEST_CASE("idf is ln(N/df) with ln(N/0.5) for unseen terms") {
  const std::vector<Document> docs{{"a", "Cats purr."}, {"b", "cats and dogs"}, {"c", "dogs bark"},
                                   {"d", "birds sing"}};
  auto t = build_idf_table(docs);
  CHECK(t.num_docs == 4);
  CHECK(t.idf("cats") == doctest::Approx(std::log(4.0 / 2.0)));
  CHECK(t.idf("purr") == doctest::Approx(std::log(4.0)));
  CHECK(t.idf("Cats") == doctest::Approx(std::log(2.0)));
  CHECK(t.idf("zebra") == doctest::Approx(std::log(8.0)));
  CHECK_THROWS_AS(build_idf_table({}), PreconditionError);
}

TEST_CASE("property: idf does not depend on document order") {
  std::mt19937 rng(11);
  const std::vector<std::string> vocab{"alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"};
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Document> docs;
    for (int d = 0; d < 25; ++d) {
      std::string body;
      for (int w = 0; w < 6; ++w) body += vocab[rng() % vocab.size()] + " ";
      docs.push_back({"d" + std::to_string(d), body});
    }
    auto base = build_idf_table(docs);
    std::shuffle(docs.begin(), docs.end(), rng);
    CHECK(build_idf_table(docs) == base);
  }
}

TEST_CASE("idf cache round-trips exactly") {
  const std::vector<Document> docs{{"a", "one two three"}, {"b", "two three"}, {"c", "three"}};
  auto t = build_idf_table(docs);
  std::stringstream ss;
  write_idf_table(t, ss);
  CHECK(ss.str().rfind("#docs=3\n", 0) == 0);
  CHECK(read_idf_table(ss) == t);
  std::istringstream bad("#docs=3\none\tx\n");
  CHECK_THROWS_AS(read_idf_table(bad), ParseError);
}
