#pragma once

// Comparison uncertainty scores computed over raw explanation texts rather
// than topologies: CoTA agreement, embedding-distance variance, entailment
// dissimilarity variance, and raw NLI-logit variance.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "topouq/chat.hpp"
#include "topouq/embedding.hpp"
#include "topouq/topology.hpp"

namespace topouq {

struct Explanation {
  std::string id;
  std::string query;
  std::vector<std::string> steps;
  std::string answer;
};

// Steps joined by newlines.
std::string ExplanationText(const Explanation& e);

// One "Q: <edge> A: <node>" step per emitted step.
Explanation ExplanationFromTopology(const ReasoningTopology& t);

Explanation ExplanationFromJson(const nlohmann::json& j);
nlohmann::json ExplanationToJson(const Explanation& e);

struct Entailment {
  double probability = 0.0;
  double logit = 0.0;
};

class EntailmentScorer {
 public:
  virtual ~EntailmentScorer() = default;
  virtual Entailment Score(std::string_view premise, std::string_view hypothesis) = 0;
};

// Offline stand-in for an NLI model: the probability is the fraction of the
// hypothesis' distinct tokens that also occur in the premise; the logit is
// its log-odds (probability clamped to [1e-6, 1 - 1e-6]).
class LexicalOverlapScorer final : public EntailmentScorer {
 public:
  Entailment Score(std::string_view premise, std::string_view hypothesis) override;
};

// Asks a chat model for an entailment probability and reads the last number
// of the reply.
class ChatEntailmentScorer final : public EntailmentScorer {
 public:
  explicit ChatEntailmentScorer(ChatClient& client) : client_(client) {}
  Entailment Score(std::string_view premise, std::string_view hypothesis) override;

 private:
  ChatClient& client_;
};

inline constexpr double kCotaThreshold = 0.7;

struct BaselineOptions {
  double cota_threshold = kCotaThreshold;
  std::size_t workers = 1;
};

// (1 / (Na + Nb)) * (sum_i max_j E(a_i, b_j) + sum_j max_i E(b_j, a_i)), with
// E binarized at the threshold.
double Cota(const Explanation& a, const Explanation& b, EntailmentScorer& scorer,
            double threshold = kCotaThreshold);

// Each of these takes the generation set of one query (>= 2 explanations) and
// returns a population variance over the strict upper triangle.
double CotaUncertainty(std::span<const Explanation> exps, EntailmentScorer& scorer,
                       const BaselineOptions& options = {});
double EmbedUncertainty(std::span<const Explanation> exps, EmbeddingProvider& provider,
                        EmbeddingCache& cache, const EmbedOptions& options = {});
double EntailUncertainty(std::span<const Explanation> exps, EntailmentScorer& scorer,
                         const BaselineOptions& options = {});
double NliLogitUncertainty(std::span<const Explanation> exps, EntailmentScorer& scorer,
                           const BaselineOptions& options = {});

}  // namespace topouq
