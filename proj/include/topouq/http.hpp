#pragma once

// Minimal JSON-over-HTTP transport shared by the remote embedding provider
// and the chat client: bearer auth, bounded in-flight requests, exponential
// backoff on transport errors, 429 and 5xx.

#include <chrono>
#include <cstdint>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>

#include <json.hpp>

namespace topouq {

inline constexpr const char* kApiKeyEnv = "TOPOUQ_API_KEY";

struct HttpOptions {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_multiplier = 2.0;
  std::chrono::milliseconds timeout{60000};
  std::ptrdiff_t max_in_flight = 8;
};

// Reads TOPOUQ_API_KEY; throws Error(kMissingApiKey) when unset or empty.
std::string ApiKeyFromEnv();

class JsonHttpClient {
 public:
  // base_url: scheme://host[:port][/prefix]
  JsonHttpClient(std::string base_url, std::string api_key, HttpOptions options = {});
  ~JsonHttpClient();

  // POSTs `body` to prefix + path. Throws Error(kTimeout) when every attempt
  // timed out, Error(kProviderUnavailable) for other transport or HTTP
  // failures.
  nlohmann::json Post(std::string_view path, const nlohmann::json& body) const;

  const std::string& base_url() const { return base_url_; }

  // Process-wide count of HTTP attempts, used to assert offline runs.
  static std::uint64_t TotalAttempts();

 private:
  std::string base_url_;
  std::string host_;
  std::string prefix_;
  std::string api_key_;
  HttpOptions options_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

}  // namespace topouq
