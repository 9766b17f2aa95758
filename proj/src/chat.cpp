#include "topouq/chat.hpp"

#include "topouq/error.hpp"
#include "topouq/text.hpp"

namespace topouq {

std::string RequestKey(const ChatRequest& r, std::string_view model) {
  nlohmann::json j = {{"model", model},
                      {"system", r.system},
                      {"user", r.user},
                      {"temperature", r.temperature},
                      {"seed", r.seed ? nlohmann::json(*r.seed) : nlohmann::json()}};
  return Sha256Hex(j.dump());
}

OpenAIChatClient::OpenAIChatClient(std::string base_url, std::string model,
                                   std::string api_key, HttpOptions options)
    : model_(std::move(model)), http_(std::move(base_url), std::move(api_key), options) {}

std::string OpenAIChatClient::Complete(const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  if (!request.system.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user}});
  nlohmann::json body = {
      {"model", model_}, {"messages", messages}, {"temperature", request.temperature}};
  if (request.seed) body["seed"] = *request.seed;

  nlohmann::json response;
  try {
    response = http_.Post("/v1/chat/completions", body);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kTimeout) throw;
    throw Error(ErrorKind::kClientFailure, e.what());
  }
  try {
    return response.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kClientFailure,
                std::string("malformed chat completion response: ") + e.what());
  }
}

JournaledChatClient::JournaledChatClient(ChatClient& inner, std::filesystem::path journal)
    : inner_(inner) {
  if (std::filesystem::exists(journal)) {
    std::ifstream in(journal);
    std::string line;
    while (std::getline(in, line)) {
      if (Trim(line).empty()) continue;
      try {
        const nlohmann::json j = nlohmann::json::parse(line);
        if (j.contains("key") && j.contains("response")) {
          done_[j["key"].get<std::string>()] = j["response"].get<std::string>();
        }
      } catch (const nlohmann::json::exception&) {
        // torn line from an interrupted run
      }
    }
  } else if (journal.has_parent_path()) {
    std::filesystem::create_directories(journal.parent_path());
  }
  out_.open(journal, std::ios::app);
  if (!out_) throw Error(ErrorKind::kIo, "cannot open journal " + journal.string());
}

std::string JournaledChatClient::Complete(const ChatRequest& request) {
  const std::string key = RequestKey(request, inner_.Model());
  {
    std::lock_guard lock(mu_);
    if (auto it = done_.find(key); it != done_.end()) {
      replayed_.fetch_add(1);
      return it->second;
    }
  }
  forwarded_.fetch_add(1);
  std::string response = inner_.Complete(request);
  std::lock_guard lock(mu_);
  if (done_.emplace(key, response).second) {
    out_ << nlohmann::json{{"key", key}, {"stage", request.stage}, {"response", response}}.dump()
         << '\n';
    out_.flush();
  }
  return response;
}

void JournaledChatClient::RecordEvent(const nlohmann::json& event) {
  std::lock_guard lock(mu_);
  out_ << event.dump() << '\n';
  out_.flush();
}

}  // namespace topouq
