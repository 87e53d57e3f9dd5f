#pragma once

// Shared fixtures: the breast-cancer dialogue, hand-set IDF tables, and a
// throwaway HTTP server for the network seams.

#include <functional>
#include <initializer_list>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>

#include "zeqr/datamodel.hpp"
#include "zeqr/ingest.hpp"

namespace fixtures {

inline const std::string kQ1 = "I just had a breast biopsy for cancer. What are the most common types?";
inline const std::string kQ2 = "Once it breaks out, how likely is it to spread?";
inline const std::string kQ3 = "How deadly is Lobular Carcinoma in Situ?";
inline const std::string kQ4 = "Wow, that is better than I thought.  What are common treatments?";
inline const std::string kQ4Resolved =
    "Wow, Lobular Neoplasia is better than I thought.  What are common treatments of Lobular "
    "Carcinoma in Situ?";
inline const std::string kA1 =
    "...Non-invasive breast cancer is when the cancer is still inside the milk ducts...";
inline const std::string kA2 = "...How is Lobular Carcinoma in Situ diagnosed? You often...";
inline const std::string kA3 = "...In this case it will be described as Lobular Neoplasia...";

inline zeqr::Session breast_cancer_session() {
  return {"31",
          {{1, kQ1, kA1, "a1"}, {2, kQ2, kA2, "a2"}, {3, kQ3, kA3, "a3"}, {4, kQ4, std::nullopt, std::nullopt}}};
}

// Listed terms get the given IDF; everything else `rest`.
inline zeqr::IdfTable idf_table(std::initializer_list<std::pair<const std::string, double>> terms,
                                double rest = 1.0) {
  zeqr::IdfTable t;
  t.term_idf = std::map<std::string, double>(terms);
  t.num_docs = 1000;
  t.default_idf = rest;
  return t;
}

// httplib server on an ephemeral loopback port, stopped on destruction.
class TestServer {
 public:
  explicit TestServer(const std::function<void(httplib::Server&)>& routes) {
    routes(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~TestServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

// Nothing listens on port 1 of the loopback interface.
inline std::string dead_url() { return "http://127.0.0.1:1"; }

}  // namespace fixtures
