#pragma once

// Deterministic offline chat model for tests and the end-to-end replica.
//
// Every question gets an instability d in [0, 1) from its hash. Generation k
// (request seed k) perturbs sub-question count, wording, structure and the
// final answer with probability proportional to d, so Reason-GED variance
// grows with d. Early-answer probes return the answer once the prefix has at
// least 1 + floor(6 (1 - d)) steps, so unstable questions also answer early
// (low faithfulness).

#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "topouq/chat.hpp"

namespace topouq {

class SyntheticChatClient final : public ChatClient {
 public:
  explicit SyntheticChatClient(std::string model = "synthetic-mock") : model_(std::move(model)) {}

  // Dispatches on request.stage; unknown stages throw Error(kClientFailure).
  std::string Complete(const ChatRequest& request) override;
  std::string Model() const override { return model_; }
  std::size_t calls() const { return calls_.load(); }

  static double Instability(std::string_view question);
  static long long BaseAnswer(std::string_view question);
  // Smallest prefix length (in steps) at which the probe already answers.
  static std::size_t EarlyAnswerThreshold(std::string_view question);

 private:
  std::string model_;
  std::atomic<std::size_t> calls_{0};
};

struct SyntheticQuestion {
  std::string id;
  std::string question;
  std::string answer;
};

std::vector<SyntheticQuestion> SyntheticDataset(std::size_t n, std::uint64_t seed);

}  // namespace topouq
