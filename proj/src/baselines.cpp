#include "topouq/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

#include "topouq/error.hpp"
#include "topouq/faithfulness.hpp"
#include "topouq/parallel.hpp"
#include "topouq/reason_ged.hpp"
#include "topouq/text.hpp"

namespace topouq {

std::string ExplanationText(const Explanation& e) {
  std::string out;
  for (std::size_t i = 0; i < e.steps.size(); ++i) {
    if (i > 0) out.push_back('\n');
    out += e.steps[i];
  }
  return out;
}

Explanation ExplanationFromTopology(const ReasoningTopology& t) {
  Explanation e;
  e.query = t.question;
  e.answer = t.answer;
  if (t.metadata.contains("generation")) e.id = "gen-" + t.metadata["generation"].dump();
  for (const Step& s : EmissionOrderSteps(t)) e.steps.push_back(RenderStep(t, s));
  return e;
}

Explanation ExplanationFromJson(const nlohmann::json& j) {
  try {
    Explanation e;
    e.id = j.value("id", std::string());
    e.query = j.at("query").get<std::string>();
    e.steps = j.at("steps").get<std::vector<std::string>>();
    e.answer = j.value("answer", std::string());
    if (e.steps.empty() || std::any_of(e.steps.begin(), e.steps.end(),
                                       [](const std::string& s) { return s.empty(); })) {
      throw Error(ErrorKind::kSchemaViolation, "explanation needs nonempty steps");
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::kSchemaViolation, std::string("explanation: ") + ex.what());
  }
}

nlohmann::json ExplanationToJson(const Explanation& e) {
  return {{"id", e.id}, {"query", e.query}, {"steps", e.steps}, {"answer", e.answer}};
}

namespace {

double LogOdds(double p) {
  p = std::clamp(p, 1e-6, 1.0 - 1e-6);
  return std::log(p / (1.0 - p));
}

void RequireSet(std::size_t n) {
  if (n < 2) {
    throw Error(ErrorKind::kTooFewGenerations,
                "baselines need at least 2 explanations, got " + std::to_string(n));
  }
}

// Symmetric pairwise matrix from a per-pair function over i < j.
template <typename Fn>
Eigen::MatrixXd PairwiseMatrix(std::size_t n, std::size_t workers, Fn&& fn) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> values(pairs.size());
  ParallelFor(pairs.size(), workers,
              [&](std::size_t k) { values[k] = fn(pairs[k].first, pairs[k].second); });
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(pairs[k].first);
    const auto j = static_cast<Eigen::Index>(pairs[k].second);
    m(i, j) = m(j, i) = values[k];
  }
  return m;
}

}  // namespace

Entailment LexicalOverlapScorer::Score(std::string_view premise, std::string_view hypothesis) {
  const std::vector<std::string> p = Tokenize(premise);
  const std::vector<std::string> h = Tokenize(hypothesis);
  const std::set<std::string> ps(p.begin(), p.end());
  const std::set<std::string> hs(h.begin(), h.end());
  double prob = 0.0;
  if (hs.empty()) {
    prob = ps.empty() ? 1.0 : 0.0;
  } else {
    std::size_t covered = 0;
    for (const std::string& t : hs) covered += ps.count(t);
    prob = static_cast<double>(covered) / static_cast<double>(hs.size());
  }
  return {prob, LogOdds(prob)};
}

Entailment ChatEntailmentScorer::Score(std::string_view premise, std::string_view hypothesis) {
  ChatRequest req;
  req.system =
      "You judge natural language inference. Given a premise and a hypothesis, reply "
      "with the probability (a number between 0 and 1) that the premise entails the "
      "hypothesis. Reply with the number only.";
  req.user = "Premise: " + std::string(premise) + "\nHypothesis: " + std::string(hypothesis) +
             "\nProbability:";
  req.temperature = 0.0;
  req.stage = "entailment";
  const std::string reply = client_.Complete(req);
  static const std::regex kNumber(R"((\d*\.\d+|\d+))");
  std::string last;
  for (auto it = std::sregex_iterator(reply.begin(), reply.end(), kNumber);
       it != std::sregex_iterator(); ++it) {
    last = it->str();
  }
  if (last.empty()) {
    throw Error(ErrorKind::kScorerFailure, "no probability in entailment reply: " + reply);
  }
  const double prob = std::clamp(std::stod(last), 0.0, 1.0);
  return {prob, LogOdds(prob)};
}

double Cota(const Explanation& a, const Explanation& b, EntailmentScorer& scorer,
            double threshold) {
  if (a.steps.empty() || b.steps.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "CoTA needs nonempty explanations");
  }
  auto entails = [&](const std::string& p, const std::string& h) {
    return scorer.Score(p, h).probability >= threshold ? 1.0 : 0.0;
  };
  double forward = 0.0;
  for (const std::string& sa : a.steps) {
    double best = 0.0;
    for (const std::string& sb : b.steps) best = std::max(best, entails(sa, sb));
    forward += best;
  }
  double backward = 0.0;
  for (const std::string& sb : b.steps) {
    double best = 0.0;
    for (const std::string& sa : a.steps) best = std::max(best, entails(sb, sa));
    backward += best;
  }
  // Forward and backward are sums of 0/1 values, so their sum is exact and
  // order-independent; cota(a, b) == cota(b, a) bitwise.
  return (forward + backward) / static_cast<double>(a.steps.size() + b.steps.size());
}

double CotaUncertainty(std::span<const Explanation> exps, EntailmentScorer& scorer,
                       const BaselineOptions& options) {
  RequireSet(exps.size());
  const Eigen::MatrixXd m = PairwiseMatrix(exps.size(), options.workers, [&](auto i, auto j) {
    return 1.0 - Cota(exps[i], exps[j], scorer, options.cota_threshold);
  });
  return UpperTriangleVariance(m);
}

double EmbedUncertainty(std::span<const Explanation> exps, EmbeddingProvider& provider,
                        EmbeddingCache& cache, const EmbedOptions& options) {
  RequireSet(exps.size());
  std::vector<std::string> texts;
  for (const Explanation& e : exps) texts.push_back(ExplanationText(e));
  const std::vector<Vector> h = EmbedTexts(texts, provider, cache, options);
  const Eigen::MatrixXd m = PairwiseMatrix(
      exps.size(), 1, [&](auto i, auto j) { return (h[i] - h[j]).norm(); });
  return UpperTriangleVariance(m);
}

double EntailUncertainty(std::span<const Explanation> exps, EntailmentScorer& scorer,
                         const BaselineOptions& options) {
  RequireSet(exps.size());
  const Eigen::MatrixXd m = PairwiseMatrix(exps.size(), options.workers, [&](auto i, auto j) {
    const std::string a = ExplanationText(exps[i]);
    const std::string b = ExplanationText(exps[j]);
    const double s = 0.5 * (scorer.Score(a, b).probability + scorer.Score(b, a).probability);
    return 1.0 - s;
  });
  return UpperTriangleVariance(m);
}

double NliLogitUncertainty(std::span<const Explanation> exps, EntailmentScorer& scorer,
                           const BaselineOptions& options) {
  RequireSet(exps.size());
  const Eigen::MatrixXd m = PairwiseMatrix(exps.size(), options.workers, [&](auto i, auto j) {
    const std::string a = ExplanationText(exps[i]);
    const std::string b = ExplanationText(exps[j]);
    return 0.5 * (scorer.Score(a, b).logit + scorer.Score(b, a).logit);
  });
  return UpperTriangleVariance(m);
}

}  // namespace topouq
