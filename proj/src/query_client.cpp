#include "motrl/query_client.hpp"

#include <cstdlib>

#include "httplib.h"
#include "json.hpp"
#include "motrl/error.hpp"

namespace motrl {

HttpQueryClient::HttpQueryClient(HttpClientConfig cfg) : cfg_(std::move(cfg)) {
  const auto scheme_end = cfg_.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw InputError("query endpoint must include a scheme: '" + cfg_.endpoint + "'");
  }
  const auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
  origin_ = cfg_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : cfg_.endpoint.substr(path_start);
}

CompletionReply HttpQueryClient::complete(const std::string& prompt) {
  httplib::Client client(origin_);
  if (!client.is_valid()) {
    return {"", "unsupported endpoint '" + origin_ + "'"};
  }
  const auto ms = cfg_.timeout.count();
  client.set_connection_timeout(ms / 1000, (ms % 1000) * 1000);
  client.set_read_timeout(ms / 1000, (ms % 1000) * 1000);
  client.set_write_timeout(ms / 1000, (ms % 1000) * 1000);

  httplib::Headers headers;
  if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  nlohmann::json body;
  body["model"] = cfg_.model;
  body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", prompt}}});

  const auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    return {"", "transport error: " + httplib::to_string(res.error())};
  }
  if (res->status < 200 || res->status >= 300) {
    return {"", "HTTP status " + std::to_string(res->status)};
  }
  const auto doc = nlohmann::json::parse(res->body, nullptr, false);
  if (doc.is_discarded()) {
    return {"", "response is not JSON"};
  }
  const auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty()) {
    return {"", "response has no choices"};
  }
  const auto& first = (*choices)[0];
  if (!first.contains("message") || !first["message"].contains("content") ||
      !first["message"]["content"].is_string()) {
    return {"", "response choice has no message content"};
  }
  std::string text = first["message"]["content"].get<std::string>();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    return {"", "empty completion"};
  }
  return {std::move(text), ""};
}

}  // namespace motrl
