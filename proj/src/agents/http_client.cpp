#include "http_client.hpp"

#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace gridsigma::agents::detail {
namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing '/'
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw DomainError("base_url needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) out.prefix = url.substr(path_start);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

}  // namespace

std::string chat_completion(const EndpointConfig& endpoint, std::string_view content) {
  const auto url = split_url(endpoint.base_url);
  httplib::Client client(url.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  if (!endpoint.api_key.empty()) client.set_bearer_token_auth(endpoint.api_key);

  const nlohmann::json body = {
      {"model", endpoint.model_name},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", content}}})},
      {"temperature", endpoint.temperature},
      {"max_tokens", endpoint.max_tokens},
  };
  const std::string payload = body.dump();
  const std::string path = url.prefix + "/v1/chat/completions";

  std::string last_error;
  for (int attempt = 0; attempt <= endpoint.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100 * attempt));
    auto res = client.Post(path, payload, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw DomainError("HTTP " + std::to_string(res->status));
    }
    std::string text;
    try {
      const auto j = nlohmann::json::parse(res->body);
      const auto& msg = j.at("choices").at(0).at("message").at("content");
      if (msg.is_string()) text = msg.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw DomainError(std::string("malformed completion body: ") + e.what());
    }
    if (text.empty()) throw DomainError("empty completion");
    return text;
  }
  throw DomainError(last_error + " after " + std::to_string(endpoint.retries + 1) + " attempts");
}

}  // namespace gridsigma::agents::detail
