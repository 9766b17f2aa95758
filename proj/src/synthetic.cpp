#include "topouq/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "topouq/baselines.hpp"
#include "topouq/error.hpp"
#include "topouq/text.hpp"

namespace topouq {
namespace {

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}
  std::uint64_t Next() { return state_ = Mix64(state_); }
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1p-53; }

 private:
  std::uint64_t state_;
};

constexpr std::string_view kWordings[] = {
    "What is fact {i} about {topic}?",
    "Which detail {i} matters for {topic}?",
    "How does step {i} relate to {topic}?",
    "Why is clue {i} about {topic} relevant?",
};

std::string Topic(std::string_view question) {
  std::string t(Trim(question));
  while (!t.empty() && (t.back() == '?' || t.back() == '.')) t.pop_back();
  return t;
}

// Sub-questions mention only the measure of a synthetic question ("the
// annual rainfall"), so wording changes move token overlap below the CoTA
// threshold instead of being swamped by the shared question text.
std::string KeyPhrase(std::string_view question) {
  const std::size_t a = question.find("given the ");
  if (a == std::string_view::npos) return Topic(question);
  const std::size_t b = question.find(" of ", a);
  return std::string(question.substr(a + 6, b == std::string_view::npos ? 0 : b - a - 6));
}

// Everything a generation decides, drawn in a fixed order so that the
// knowledge and topology stages agree.
struct Plan {
  std::vector<std::string> sub_questions;
  std::vector<std::string> steps;  // "[A, B, E]"
  long long answer = 0;
};

Plan MakePlan(std::string_view question, std::int64_t seed) {
  const std::uint64_t h = Fnv1a64(question);
  const double d = SyntheticChatClient::Instability(question);
  Stream g(h ^ Mix64(static_cast<std::uint64_t>(seed)));
  Plan p;

  std::size_t n = 3 + h % 3;
  if (g.Uniform() < d) n = g.Uniform() < 0.5 ? n - 1 : n + 1;
  const std::string topic = KeyPhrase(question);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t variant = 0;
    if (g.Uniform() < d) variant = 1 + g.Next() % 3;
    std::string s(kWordings[variant]);
    s.replace(s.find("{i}"), 3, std::to_string(i + 1));
    s.replace(s.find("{topic}"), 7, topic);
    p.sub_questions.push_back(std::move(s));
  }

  auto node = [](std::size_t i) { return "Node" + std::to_string(i); };
  auto edge = [](std::size_t i) { return "Edge" + std::to_string(i); };
  const bool dangling = n >= 3 && g.Uniform() < 0.5 * d;
  const std::size_t chain = dangling ? n - 1 : n;
  const bool branch = chain >= 2 && g.Uniform() < d;
  const std::size_t branch_at = branch ? 1 + g.Next() % (chain - 1) : 0;
  p.steps.push_back("[NodeRaw, Node0, Edge0]");
  for (std::size_t i = 1; i < chain; ++i) {
    const std::string from = branch && i == branch_at ? "NodeRaw" : node(i - 1);
    p.steps.push_back("[" + from + ", " + node(i) + ", " + edge(i) + "]");
  }
  if (dangling) {
    p.steps.push_back("[" + node(chain - 1) + ", " + node(n - 1) + ", " + edge(n - 1) + "]");
  }
  p.steps.push_back("[" + node(chain - 1) + ", NodeResult, ResultEdge]");

  p.answer = SyntheticChatClient::BaseAnswer(question);
  if (g.Uniform() < 0.5 * d) p.answer += 1 + static_cast<long long>(g.Next() % 3);
  return p;
}

std::string Between(std::string_view s, std::string_view open, std::string_view close) {
  const std::size_t a = s.find(open);
  if (a == std::string_view::npos) return {};
  const std::size_t b = s.find(close, a + open.size());
  return std::string(s.substr(a + open.size(), b == std::string_view::npos
                                                   ? std::string_view::npos
                                                   : b - a - open.size()));
}

}  // namespace

double SyntheticChatClient::Instability(std::string_view question) {
  return static_cast<double>(Mix64(Fnv1a64(question)) >> 11) * 0x1p-53;
}

long long SyntheticChatClient::BaseAnswer(std::string_view question) {
  return 10 + static_cast<long long>(Fnv1a64(question) % 90);
}

std::size_t SyntheticChatClient::EarlyAnswerThreshold(std::string_view question) {
  return 1 + static_cast<std::size_t>(std::floor(6.0 * (1.0 - Instability(question))));
}

std::string SyntheticChatClient::Complete(const ChatRequest& request) {
  calls_.fetch_add(1);
  const std::int64_t seed = request.seed.value_or(0);

  if (request.stage == "knowledge") {
    const Plan p = MakePlan(request.subject, seed);
    std::string out;
    for (std::size_t i = 0; i < p.sub_questions.size(); ++i) {
      out += std::to_string(i + 1) + ". " + p.sub_questions[i] + "\n";
    }
    return out;
  }
  if (request.stage == "self_answer") {
    const std::uint64_t h = Fnv1a64(request.subject);
    return "For " + Topic(request.subject) + ", the relevant value is " +
           std::to_string(h % 97) + ".";
  }
  if (request.stage == "topology") {
    const Plan p = MakePlan(request.subject, seed);
    std::string out = "Structure: {";
    for (std::size_t i = 0; i < p.steps.size(); ++i) {
      if (i > 0) out += ", ";
      out += p.steps[i];
    }
    return out + "}; ResultEdge: The answer is " + std::to_string(p.answer) + ".;}";
  }
  if (request.stage == "early_answer") {
    const std::string_view prefix = request.subject;
    const std::size_t cut = prefix.find("\nQ: ");
    const std::string_view question = prefix.substr(0, cut);
    std::size_t k = 0;
    for (std::size_t pos = prefix.find("\nQ: "); pos != std::string_view::npos;
         pos = prefix.find("\nQ: ", pos + 1)) {
      ++k;
    }
    if (k >= EarlyAnswerThreshold(question)) {
      return "The answer is " + std::to_string(BaseAnswer(question)) + ".";
    }
    return "Not enough steps yet to conclude.";
  }
  if (request.stage == "entailment") {
    LexicalOverlapScorer lexical;
    const std::string premise = Between(request.user, "Premise: ", "\nHypothesis: ");
    const std::string hypothesis = Between(request.user, "\nHypothesis: ", "\nProbability:");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", lexical.Score(premise, hypothesis).probability);
    return buf;
  }
  throw Error(ErrorKind::kClientFailure, "synthetic client has no stage '" + request.stage + "'");
}

std::vector<SyntheticQuestion> SyntheticDataset(std::size_t n, std::uint64_t seed) {
  static constexpr std::string_view kPlaces[] = {"the coastal basin", "the high plateau",
                                                 "the river delta",  "the northern valley",
                                                 "the island chain", "the desert margin"};
  static constexpr std::string_view kMeasures[] = {"annual rainfall", "population density",
                                                   "mean altitude",   "glacier coverage",
                                                   "soil salinity",   "river discharge"};
  std::vector<SyntheticQuestion> out;
  Stream g(Mix64(seed));
  for (std::size_t i = 0; i < n; ++i) {
    SyntheticQuestion q;
    char id[32];
    std::snprintf(id, sizeof id, "q%03zu", i);
    q.id = id;
    q.question = "Case " + std::to_string(i) + ": given the " +
                 std::string(kMeasures[g.Next() % std::size(kMeasures)]) + " of " +
                 std::string(kPlaces[g.Next() % std::size(kPlaces)]) +
                 ", what index value does it map to?";
    q.answer = std::to_string(SyntheticChatClient::BaseAnswer(q.question));
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace topouq
