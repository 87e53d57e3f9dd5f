#pragma once

#include <chrono>
#include <string>

#include <json.hpp>

namespace zeqr::detail {

struct HttpPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{100};
  std::chrono::seconds timeout{30};
};

// POSTs a JSON body to base_url + path and parses the JSON reply.
// Connection failures and 5xx replies are retried with exponential backoff
// and end in TransportError; other non-200 replies and unparseable bodies
// raise ProtocolError.
nlohmann::json post_json(const std::string& base_url, const std::string& path,
                         const nlohmann::json& body, const HttpPolicy& policy);

}  // namespace zeqr::detail
