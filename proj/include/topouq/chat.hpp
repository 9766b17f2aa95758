#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "topouq/http.hpp"

namespace topouq {

struct ChatRequest {
  std::string system;
  std::string user;
  double temperature = 0.0;
  std::optional<std::int64_t> seed;
  // Pipeline stage ("knowledge", "self_answer", "topology", "early_answer",
  // "entailment"). Not sent over the wire.
  std::string stage;
  // The stage's primary input (question, sub-question or truncated prefix).
  // Determined by `user` under a fixed template; lets offline clients answer
  // without scraping the rendered prompt. Not sent, not part of the key.
  std::string subject;
};

// Stable identity of a request, used as the journal key.
std::string RequestKey(const ChatRequest& r, std::string_view model);

// (system, user, decoding params) -> completion text. Implementations must be
// safe to call from several threads. Failures surface as Error(kClientFailure)
// or Error(kTimeout).
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string Complete(const ChatRequest& request) = 0;
  virtual std::string Model() const = 0;
};

// OpenAI-compatible POST {base_url}/v1/chat/completions.
class OpenAIChatClient final : public ChatClient {
 public:
  OpenAIChatClient(std::string base_url, std::string model, std::string api_key,
                   HttpOptions options = {});

  std::string Complete(const ChatRequest& request) override;
  std::string Model() const override { return model_; }

 private:
  std::string model_;
  JsonHttpClient http_;
};

// Offline client backed by a callable; counts calls.
class FunctionChatClient final : public ChatClient {
 public:
  using Fn = std::function<std::string(const ChatRequest&)>;
  FunctionChatClient(std::string model, Fn fn) : model_(std::move(model)), fn_(std::move(fn)) {}

  std::string Complete(const ChatRequest& request) override {
    calls_.fetch_add(1);
    return fn_(request);
  }
  std::string Model() const override { return model_; }
  std::size_t calls() const { return calls_.load(); }

 private:
  std::string model_;
  Fn fn_;
  std::atomic<std::size_t> calls_{0};
};

// Wraps a client with an append-only JSONL journal of completed requests.
// A request whose key is already journaled is answered from the journal
// without touching the inner client, so interrupted runs resume and
// completed runs replay with zero remote calls.
class JournaledChatClient final : public ChatClient {
 public:
  JournaledChatClient(ChatClient& inner, std::filesystem::path journal);

  std::string Complete(const ChatRequest& request) override;
  std::string Model() const override { return inner_.Model(); }

  // Appends a free-form event line (e.g. a failure record).
  void RecordEvent(const nlohmann::json& event);

  std::size_t replayed() const { return replayed_.load(); }
  std::size_t forwarded() const { return forwarded_.load(); }

 private:
  ChatClient& inner_;
  std::mutex mu_;
  std::unordered_map<std::string, std::string> done_;
  std::ofstream out_;
  std::atomic<std::size_t> replayed_{0};
  std::atomic<std::size_t> forwarded_{0};
};

}  // namespace topouq
