#pragma once

#include <chrono>
#include <string>

namespace motrl {

struct CompletionReply {
  std::string text;
  std::string error;  // empty on success

  bool ok() const noexcept { return error.empty(); }
};

// Chat-completion style text generator used for query phrasing.
class QueryClient {
 public:
  virtual ~QueryClient() = default;
  virtual CompletionReply complete(const std::string& prompt) = 0;
};

struct HttpClientConfig {
  // e.g. http://localhost:8080/v1/chat/completions
  std::string endpoint;
  std::string model = "query-generator";
  std::string api_key_env = "MOTRL_QUERY_API_KEY";
  std::chrono::milliseconds timeout{30000};
};

/// POSTs {"model", "messages": [{"role": "user", "content": prompt}]} and
/// returns choices[0].message.content. Transport errors, non-2xx statuses,
/// malformed bodies, and blank content come back as CompletionReply::error.
/// The API key, if the named environment variable is set, is sent as a
/// bearer token.
class HttpQueryClient : public QueryClient {
 public:
  explicit HttpQueryClient(HttpClientConfig cfg);

  CompletionReply complete(const std::string& prompt) override;

 private:
  HttpClientConfig cfg_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
};

}  // namespace motrl
