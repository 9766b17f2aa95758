#pragma once

// Three-call elicitation pipeline: knowledge reflection (numbered
// sub-questions), self-answering (one call per sub-question) and few-shot
// topology construction (one call producing the Structure block).

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "topouq/chat.hpp"
#include "topouq/error.hpp"
#include "topouq/topology.hpp"

namespace topouq {

struct KnowledgeAnswerPair {
  std::string tag;       // Edge<i>
  std::string node_tag;  // Node<i>
  std::string sub_question;
  std::string sub_answer;
  bool operator==(const KnowledgeAnswerPair&) const = default;
};

struct PromptTemplate {
  std::string system;
  std::string user;
};

struct FewShotExample {
  std::string question;
  std::vector<KnowledgeAnswerPair> pairs;
  std::string structure;
};

struct PromptBundle {
  PromptTemplate knowledge;    // placeholders: question, few_shot_example
  PromptTemplate self_answer;  // placeholders: sub_question
  PromptTemplate topology;     // placeholders: question, reason_path_example, q_a
  std::vector<FewShotExample> few_shot;

  // The bundled templates compiled in from templates/v1.
  static PromptBundle Default();
  // A directory holding knowledge.txt, self_answer.txt, topology.txt and
  // few_shot.json. Throws Error(kSchemaViolation) if a template does not
  // render or there are no examples.
  static PromptBundle Load(const std::filesystem::path& dir);

  // SHA-256 per template, recorded in every elicited topology.
  nlohmann::json Hashes() const;
};

// Splits a `[system]` / `[user]` sectioned template file.
PromptTemplate ParsePromptTemplate(std::string_view text);

// "1. A" / "2) B" lines; anything else is ignored.
std::vector<std::string> ParseNumberedPoints(std::string_view text);

// "Edge<i>: <question>, Node<i>: <answer>;" lines.
std::string RenderPairs(const std::vector<KnowledgeAnswerPair>& pairs);

struct ElicitOptions {
  double temperature = 1.0;
  std::optional<std::int64_t> seed;
  std::size_t workers = 1;
};

// Answers are left empty. Throws Error(kUnparseableResponse) if neither the
// first reply nor one retry with a format reminder has numbered points.
std::vector<KnowledgeAnswerPair> ReflectKnowledge(const std::string& query, ChatClient& client,
                                                  const PromptBundle& bundle,
                                                  const ElicitOptions& options = {});

struct ItemFailure {
  std::size_t index = 0;
  ErrorKind kind = ErrorKind::kClientFailure;
  std::string message;
};

struct SelfAnswerResult {
  std::vector<KnowledgeAnswerPair> pairs;  // same order; failed items keep an empty answer
  std::vector<ItemFailure> failures;
  bool complete() const { return failures.empty(); }
};

SelfAnswerResult SelfAnswer(std::vector<KnowledgeAnswerPair> pairs, ChatClient& client,
                            const PromptBundle& bundle, const ElicitOptions& options = {});

// The topology's answer is the ResultEdge clause text. One retry with the
// parse error appended; a second failure throws Error(kElicitationFailed).
ReasoningTopology ConstructTopology(const std::string& query,
                                    const std::vector<KnowledgeAnswerPair>& pairs,
                                    ChatClient& client, const PromptBundle& bundle,
                                    const ElicitOptions& options = {});

// Full pipeline for one generation; metadata is left for the caller.
ReasoningTopology ElicitTopology(const std::string& query, ChatClient& client,
                                 const PromptBundle& bundle, const ElicitOptions& options);

struct GenerationFailure {
  int generation = 0;
  ErrorKind kind = ErrorKind::kElicitationFailed;
  std::string message;
};

struct GenerationSet {
  std::string question_id;
  std::vector<ReasoningTopology> topologies;  // ascending generation index
  std::vector<GenerationFailure> failures;
  bool partial() const { return !failures.empty(); }
};

struct GenerationOptions {
  std::size_t samples = 10;  // L
  double temperature = 1.0;
  std::size_t workers = 1;
  std::string reference_answer;
  // When set, generations are written to <run_dir>/<question_id>/gen-<k>.json
  // and every chat call goes through <run_dir>/<question_id>/journal.jsonl.
  // Existing gen files are loaded instead of re-elicited.
  std::optional<std::filesystem::path> run_dir;
};

// Generation k is sampled with seed k. Throws Error(kElicitationFailed) if
// fewer than 2 generations parse.
GenerationSet ElicitGenerationSet(const std::string& question_id, const std::string& query,
                                  ChatClient& client, const PromptBundle& bundle,
                                  const GenerationOptions& options);

// Success-rate accounting over construct attempts.
struct ElicitationStats {
  std::size_t attempted = 0;
  std::size_t succeeded = 0;
  void Add(const GenerationSet& set, std::size_t samples);
  double rate() const {
    return attempted == 0 ? 0.0 : static_cast<double>(succeeded) / static_cast<double>(attempted);
  }
};

}  // namespace topouq
