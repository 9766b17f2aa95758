#include "topouq/http.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "topouq/error.hpp"

namespace topouq {
namespace {

std::atomic<std::uint64_t> g_attempts{0};

bool IsTimeout(httplib::Error e) {
  return e == httplib::Error::ConnectionTimeout || e == httplib::Error::Read ||
         e == httplib::Error::Write;
}

bool IsRetryableStatus(int status) { return status == 429 || status >= 500; }

}  // namespace

std::string ApiKeyFromEnv() {
  const char* key = std::getenv(kApiKeyEnv);
  if (key == nullptr || *key == '\0') {
    throw Error(ErrorKind::kMissingApiKey,
                std::string(kApiKeyEnv) + " is not set; remote endpoints need it");
  }
  return key;
}

JsonHttpClient::JsonHttpClient(std::string base_url, std::string api_key,
                               HttpOptions options)
    : base_url_(std::move(base_url)),
      api_key_(std::move(api_key)),
      options_(options),
      in_flight_(std::make_unique<std::counting_semaphore<>>(
          std::max<std::ptrdiff_t>(1, options.max_in_flight))) {
  const std::size_t scheme = base_url_.find("://");
  if (scheme == std::string::npos) {
    throw Error(ErrorKind::kInvalidArgument,
                "endpoint must look like http(s)://host[:port][/prefix]: " + base_url_);
  }
  const std::size_t path = base_url_.find('/', scheme + 3);
  host_ = base_url_.substr(0, path);
  prefix_ = path == std::string::npos ? "" : base_url_.substr(path);
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
}

JsonHttpClient::~JsonHttpClient() = default;

std::uint64_t JsonHttpClient::TotalAttempts() { return g_attempts.load(); }

nlohmann::json JsonHttpClient::Post(std::string_view path,
                                    const nlohmann::json& body) const {
  in_flight_->acquire();
  struct Release {
    std::counting_semaphore<>* s;
    ~Release() { s->release(); }
  } release{in_flight_.get()};

  httplib::Client client(host_);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
      options_.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());
  client.set_bearer_token_auth(api_key_);

  const std::string full_path = prefix_ + std::string(path);
  const std::string payload = body.dump();
  auto backoff = options_.initial_backoff;
  std::string last_error;
  bool all_timeouts = true;

  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(static_cast<long long>(
          static_cast<double>(backoff.count()) * options_.backoff_multiplier));
    }
    g_attempts.fetch_add(1);
    auto res = client.Post(full_path, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      all_timeouts = all_timeouts && IsTimeout(res.error());
      continue;
    }
    all_timeouts = false;
    if (res->status >= 200 && res->status < 300) {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::kProviderUnavailable,
                    "invalid JSON from " + full_path + ": " + e.what());
      }
    }
    last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
    if (!IsRetryableStatus(res->status)) break;
  }
  throw Error(all_timeouts ? ErrorKind::kTimeout : ErrorKind::kProviderUnavailable,
              "POST " + host_ + full_path + " failed: " + last_error);
}

}  // namespace topouq
