#include "http_client.hpp"

#include <thread>

#include <httplib.h>

#include "zeqr/error.hpp"

namespace zeqr::detail {
namespace {

// Splits "http://host:port/prefix" into client origin and path prefix.
std::pair<std::string, std::string> split_url(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) throw PreconditionError("endpoint must be an http:// url: " + url);
  auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

}  // namespace

nlohmann::json post_json(const std::string& base_url, const std::string& path,
                         const nlohmann::json& body, const HttpPolicy& policy) {
  const auto [origin, prefix] = split_url(base_url);
  const std::string target = prefix + path;
  const std::string payload = body.dump();
  auto backoff = policy.initial_backoff;
  std::string last_error;
  const int attempts = std::max(1, policy.max_attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    httplib::Client client(origin);
    client.set_connection_timeout(policy.timeout);
    client.set_read_timeout(policy.timeout);
    client.set_write_timeout(policy.timeout);
    auto res = client.Post(target, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
    } else if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
    } else if (res->status != 200) {
      throw ProtocolError(origin + target + " replied HTTP " + std::to_string(res->status) +
                          ": " + res->body);
    } else {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::parse_error& e) {
        throw ProtocolError(origin + target + " replied with invalid JSON: " + e.what());
      }
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw TransportError(origin + target + " unreachable after " + std::to_string(attempts) +
                           " attempts: " + last_error,
                       base_url, attempts);
}

}  // namespace zeqr::detail
