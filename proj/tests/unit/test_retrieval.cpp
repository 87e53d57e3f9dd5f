#include <doctest.h>

#include <random>
#include <sstream>

#include <json.hpp>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "zeqr/error.hpp"
#include "zeqr/retrieval.hpp"

using namespace zeqr;
using nlohmann::json;

namespace {

std::vector<Document> random_corpus(std::mt19937& rng, int n, int vocab) {
  std::vector<Document> docs;
  std::geometric_distribution<int> word(0.08);
  std::uniform_int_distribution<int> len(1, 60);
  for (int i = 0; i < n; ++i) {
    std::string body;
    for (int j = 0, l = len(rng); j < l; ++j) body += "w" + std::to_string(std::min(word(rng), vocab)) + " ";
    docs.push_back({"doc" + std::to_string(i), body});
  }
  return docs;
}

RemoteOptions fast() {
  RemoteOptions o;
  o.initial_backoff = std::chrono::milliseconds(1);
  o.timeout = std::chrono::seconds(5);
  return o;
}

}  // namespace

TEST_CASE("analyzer switches") {
  CHECK(analyze("The Cats' toys, and THE dogs") ==
        std::vector<std::string>{"the", "cats", "toys", "and", "the", "dogs"});
  CHECK(analyze("The cats and the dogs", {true, false}) == std::vector<std::string>{"cats", "dogs"});
  CHECK(analyze("cats ponies glasses series", {false, true}) ==
        std::vector<std::string>{"cat", "pony", "glasse", "sery"});
}

TEST_CASE("bm25 on a tiny corpus") {
  const std::vector<Document> docs{{"a", "lobular carcinoma treatments"},
                                   {"b", "carcinoma"},
                                   {"c", "acne treatments and more acne"},
                                   {"d", "nothing relevant here"}};
  const auto index = build_index(docs);
  CHECK(index.num_docs == 4);
  CHECK(index.df("carcinoma") == 2);
  const auto run = bm25_search(index, "carcinoma treatments", 10, Config{}, "q", "tag");
  CHECK(run.query_id == "q");
  CHECK(run.tag == "tag");
  REQUIRE(run.ranked.size() == 3);  // "d" matches nothing
  CHECK(run.ranked[0].doc_id == "a");
  const auto want = oracles::brute_bm25(docs, "carcinoma treatments", 0.9, 0.4);
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(run.ranked[i].doc_id == want[i].doc_id);
    CHECK(run.ranked[i].score == doctest::Approx(want[i].score).epsilon(1e-12));
  }
  CHECK(bm25_search(index, "zebra", 10, Config{}).ranked.empty());
  CHECK(bm25_search(index, "", 10, Config{}).ranked.empty());
  CHECK_THROWS_AS(bm25_search(index, "x", 0, Config{}), PreconditionError);
}

TEST_CASE("ties go to the smaller document id") {
  const std::vector<Document> docs{{"z", "same text"}, {"m", "same text"}, {"a", "same text"}};
  const auto run = bm25_search(build_index(docs), "same", 2, Config{});
  REQUIRE(run.ranked.size() == 2);
  CHECK(run.ranked[0].doc_id == "a");
  CHECK(run.ranked[1].doc_id == "m");
}

TEST_CASE("index construction errors") {
  CHECK_THROWS_AS(build_index({}), PreconditionError);
  CHECK_THROWS_AS(build_index({{"a", "x"}, {"a", "y"}}), PreconditionError);
  CHECK_THROWS_AS(build_index({{"a b", "x"}}), PreconditionError);
}

TEST_CASE("property: bm25 matches brute force") {
  std::mt19937 rng(47);
  const auto docs = random_corpus(rng, 120, 80);
  for (const AnalyzerOptions opts : {AnalyzerOptions{}, AnalyzerOptions{true, true}}) {
    const auto index = build_index(docs, opts);
    for (int q = 0; q < 25; ++q) {
      std::string query;
      for (int j = 0, n = 1 + static_cast<int>(rng() % 5); j < n; ++j)
        query += "w" + std::to_string(rng() % 90) + " ";
      Config c;
      c.bm25_k1 = 0.5 + static_cast<double>(rng() % 20) / 10.0;
      c.bm25_b = static_cast<double>(rng() % 11) / 10.0;
      const auto want = oracles::brute_bm25(docs, query, c.bm25_k1, c.bm25_b, opts);
      const auto got = bm25_search(index, query, 1000, c);
      REQUIRE(got.ranked.size() == want.size());
      for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(got.ranked[i].doc_id == want[i].doc_id);
        CHECK(std::abs(got.ranked[i].score - want[i].score) < 1e-6);
      }
    }
  }
}

TEST_CASE("index round-trips through its text form") {
  std::mt19937 rng(53);
  const auto docs = random_corpus(rng, 30, 20);
  const auto index = build_index(docs, {true, false});
  std::stringstream ss;
  write_index(index, ss);
  CHECK(ss.str().rfind("zeqr-index 1\n", 0) == 0);
  const auto back = read_index(ss);
  CHECK(back == index);
  CHECK(bm25_search(back, "w1 w2", 10, Config{}) == bm25_search(index, "w1 w2", 10, Config{}));
  std::istringstream bad("zeqr-index 2\n");
  CHECK_THROWS_AS(read_index(bad), ParseError);
}

TEST_CASE("run files round-trip") {
  const std::vector<RunResult> runs{{"31_1", {{"d1", 12.5}, {"d2", 0.1 + 0.2}}, "zeqr"},
                                    {"30_2", {{"d9", -1.0}}, "zeqr"}};
  std::stringstream ss;
  write_run(runs, ss);
  CHECK(ss.str().rfind("31_1 Q0 d1 1 12.5 zeqr\n", 0) == 0);
  CHECK(read_run(ss) == runs);
  std::istringstream bad("31_1 Q0 d1 one 1.0 x\n");
  CHECK_THROWS_AS(read_run(bad), ParseError);
  std::istringstream shuffled("q Q0 b 2 1.0 t\nq Q0 a 1 2.0 t\n");
  const auto parsed = read_run(shuffled);
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].ranked[0].doc_id == "a");
}

TEST_CASE("ranking validation") {
  CHECK_NOTHROW(validate(RunResult{"q", {{"a", 2}, {"b", 2}, {"c", 1}}, "t"}, 3));
  CHECK_THROWS_AS(validate(RunResult{"q", {{"a", 1}, {"b", 2}}, "t"}, 5), ProtocolError);
  CHECK_THROWS_AS(validate(RunResult{"q", {{"a", 2}, {"a", 1}}, "t"}, 5), ProtocolError);
  CHECK_THROWS_AS(validate(RunResult{"q", {{"a", 2}, {"b", 1}}, "t"}, 1), ProtocolError);
}

TEST_CASE("external retriever over loopback") {
  fixtures::TestServer server([](httplib::Server& s) {
    s.Post("/search", [](const httplib::Request& req, httplib::Response& res) {
      auto body = json::parse(req.body);
      if (body["query"] == "bad order") {
        res.set_content(R"({"hits": [{"doc_id": "a", "score": 1}, {"doc_id": "b", "score": 2}]})",
                        "application/json");
        return;
      }
      if (body["query"] == "malformed") {
        res.set_content(R"({"results": []})", "application/json");
        return;
      }
      CHECK(body["k"] == 2);
      res.set_content(R"({"hits": [{"doc_id": "d7", "score": 3.5}, {"doc_id": "d2", "score": 1.25}]})",
                      "application/json");
    });
  });
  const auto run = external_search(server.url(), "lobular carcinoma", 2, "31_4", "dense", fast());
  CHECK(run == RunResult{"31_4", {{"d7", 3.5}, {"d2", 1.25}}, "dense"});
  CHECK_THROWS_AS(external_search(server.url(), "bad order", 5, "q", "t", fast()), ProtocolError);
  CHECK_THROWS_AS(external_search(server.url(), "malformed", 5, "q", "t", fast()), ProtocolError);
}

TEST_CASE("unreachable retriever names the endpoint") {
  try {
    external_search(fixtures::dead_url(), "q", 5, "q", "t", fast());
    FAIL("expected a retrieval error");
  } catch (const RetrievalError& e) {
    CHECK(e.endpoint() == fixtures::dead_url());
  }
}
