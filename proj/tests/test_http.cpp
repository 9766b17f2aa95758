#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "topouq/chat.hpp"
#include "topouq/embedding.hpp"
#include "topouq/http.hpp"

// After Eigen: resolv.h (pulled in by httplib) defines a `_res` macro.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

using namespace topouq;

namespace {

// Local OpenAI-shaped server. The first `fail_first` requests get
// `fail_status`; the rest are answered.
class FakeServer {
 public:
  explicit FakeServer(int fail_first = 0, int fail_status = 503) {
    server_.Post("/v1/embeddings", [this, fail_first, fail_status](const httplib::Request& req,
                                                                   httplib::Response& res) {
      if (!Record(req, fail_first, fail_status, res)) return;
      nlohmann::json data = nlohmann::json::array();
      const auto input = last_body["input"];
      // reversed order, identified by index
      for (std::size_t i = input.size(); i-- > 0;) {
        data.push_back({{"index", i}, {"embedding", {static_cast<double>(i) + 1.0, 2.0}}});
      }
      res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
    });
    server_.Post("/v1/chat/completions", [this, fail_first, fail_status](const httplib::Request& req,
                                                                         httplib::Response& res) {
      if (!Record(req, fail_first, fail_status, res)) return;
      nlohmann::json reply = {
          {"choices", {{{"message", {{"role", "assistant"}, {"content", "pong"}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::atomic<int> requests{0};
  std::string last_auth;
  nlohmann::json last_body;

 private:
  bool Record(const httplib::Request& req, int fail_first, int fail_status,
              httplib::Response& res) {
    const int n = requests.fetch_add(1);
    last_auth = req.get_header_value("Authorization");
    last_body = nlohmann::json::parse(req.body);
    if (n < fail_first) {
      res.status = fail_status;
      res.set_content("busy", "text/plain");
      return false;
    }
    return true;
  }

  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

HttpOptions Fast() {
  HttpOptions o;
  o.initial_backoff = std::chrono::milliseconds(1);
  o.timeout = std::chrono::milliseconds(5000);
  return o;
}

}  // namespace

TEST_SUITE("http") {

TEST_CASE("embeddings wire format") {
  FakeServer server;
  OpenAIEmbeddingProvider p(server.url(), "embed-small", "sk-test", Fast());
  const std::vector<std::string> texts = {"alpha", "beta", "gamma"};
  const auto v = p.Embed(texts);
  CHECK(server.last_auth == "Bearer sk-test");
  CHECK(server.last_body["model"] == "embed-small");
  CHECK(server.last_body["input"] == nlohmann::json(texts));
  REQUIRE(v.size() == 3);
  CHECK(v[0][0] == 1.0);
  CHECK(v[2][0] == 3.0);
}

TEST_CASE("chat wire format") {
  FakeServer server;
  OpenAIChatClient c(server.url() + "/", "chat-model", "sk-chat", Fast());
  ChatRequest r;
  r.system = "sys";
  r.user = "ping";
  r.temperature = 0.5;
  r.seed = 3;
  r.stage = "knowledge";
  r.subject = "not sent";
  CHECK(c.Complete(r) == "pong");
  const auto& body = server.last_body;
  CHECK(body["model"] == "chat-model");
  CHECK(body["temperature"] == 0.5);
  CHECK(body["seed"] == 3);
  REQUIRE(body["messages"].size() == 2);
  CHECK(body["messages"][0] == nlohmann::json{{"role", "system"}, {"content", "sys"}});
  CHECK(body["messages"][1] == nlohmann::json{{"role", "user"}, {"content", "ping"}});
  CHECK(body.dump().find("not sent") == std::string::npos);
  CHECK_FALSE(body.contains("stage"));
  CHECK(server.last_auth == "Bearer sk-chat");
}

TEST_CASE("retries 429 and 5xx, not 4xx") {
  {
    FakeServer server(2, 429);
    JsonHttpClient http(server.url(), "k", Fast());
    const auto before = JsonHttpClient::TotalAttempts();
    CHECK_NOTHROW(http.Post("/v1/chat/completions", {{"x", 1}}));
    CHECK(server.requests == 3);
    CHECK(JsonHttpClient::TotalAttempts() - before == 3);
  }
  {
    FakeServer server(10, 502);
    JsonHttpClient http(server.url(), "k", Fast());
    CHECK_THROWS_AS(http.Post("/v1/chat/completions", {{"x", 1}}), Error);
    CHECK(server.requests == 4);
  }
  {
    FakeServer server(10, 400);
    JsonHttpClient http(server.url(), "k", Fast());
    try {
      http.Post("/v1/chat/completions", {{"x", 1}});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kProviderUnavailable);
    }
    CHECK(server.requests == 1);
  }
}

TEST_CASE("api key comes from the environment") {
  const char* saved = std::getenv(kApiKeyEnv);
  const std::string keep = saved ? saved : "";
  unsetenv(kApiKeyEnv);
  CHECK_THROWS_AS(ApiKeyFromEnv(), Error);
  setenv(kApiKeyEnv, "sk-env", 1);
  CHECK(ApiKeyFromEnv() == "sk-env");
  if (saved) {
    setenv(kApiKeyEnv, keep.c_str(), 1);
  } else {
    unsetenv(kApiKeyEnv);
  }
  CHECK_THROWS_AS(JsonHttpClient("localhost:8080", "k"), Error);
}

}
