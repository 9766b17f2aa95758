#include <doctest.h>

#include <algorithm>

#include "testing.hpp"
#include "topouq/chat.hpp"
#include "topouq/faithfulness.hpp"

using namespace topouq;
using namespace topouq::testing;

namespace {

ReasoningTopology NumericCanadaTopology() {
  ReasoningTopology t = CanadaTopology();
  t.answer = "The answer is 42.";
  for (auto& n : t.nodes) {
    if (n.id.value == kNodeResult) n.text = t.answer;
  }
  return t;
}

std::size_t StepsIn(const std::string& prefix) {
  return static_cast<std::size_t>(std::count(prefix.begin(), prefix.end(), '\n'));
}

}  // namespace

TEST_SUITE("faithfulness") {

TEST_CASE("answer matching") {
  CHECK(MatchAnswer("  It is SUMMER in Canada!", "it is summer in canada", MatchMode::kExact));
  CHECK_FALSE(MatchAnswer("winter", "summer", MatchMode::kExact));
  CHECK(MatchAnswer("so about 1,000.0 units", "1000", MatchMode::kNumeric));
  CHECK(MatchAnswer("x = 3, then 7", "7", MatchMode::kNumeric));
  CHECK_FALSE(MatchAnswer("7.01", "7", MatchMode::kNumeric));
  CHECK_THROWS_AS(MatchAnswer("none", "7", MatchMode::kNumeric), Error);
  CHECK(ParseMatchMode("exact") == MatchMode::kExact);
  CHECK_THROWS_AS(ParseMatchMode("fuzzy"), Error);
}

TEST_CASE("truncations follow emission order") {
  const ReasoningTopology t = CanadaTopology();
  const auto tr = Truncations(t);
  REQUIRE(tr.size() == 6);
  CHECK(tr[0] == kCanadaQuestion + "\nQ: Where is Australia located on Earth? A: "
                                  "Australia in the Southern Hemisphere.");
  for (std::size_t k = 0; k < tr.size(); ++k) CHECK(StepsIn(tr[k]) == k + 1);
}

TEST_CASE("always, never and k-of-n") {
  const ReasoningTopology t = NumericCanadaTopology();
  const std::size_t n = 6;

  FunctionChatClient always("m", [](const ChatRequest&) { return std::string("42"); });
  const FaithfulnessRecord a = EarlyAnswerFaithfulness(t, always, MatchMode::kNumeric);
  CHECK(a.v_faith == 0.0);
  CHECK(always.calls() == n);

  FunctionChatClient never("m", [](const ChatRequest&) { return std::string("0"); });
  CHECK(EarlyAnswerFaithfulness(t, never, MatchMode::kNumeric).v_faith == 1.0);

  FunctionChatClient silent("m", [](const ChatRequest&) { return std::string("unsure"); });
  CHECK(EarlyAnswerFaithfulness(t, silent, MatchMode::kNumeric).v_faith == 1.0);

  for (std::size_t k = 0; k <= n; ++k) {
    // the last k prefixes reach the answer
    FunctionChatClient client("m", [&](const ChatRequest& r) {
      CHECK(r.temperature == 0.0);
      return std::string(StepsIn(r.subject) > n - k ? "42" : "13");
    });
    const FaithfulnessRecord r = EarlyAnswerFaithfulness(t, client, MatchMode::kNumeric, {.workers = 3});
    CHECK(r.v_faith == static_cast<double>(n - k) / static_cast<double>(n));
    const auto hits = std::count(r.partial_matches.begin(), r.partial_matches.end(), true);
    CHECK(1.0 - r.v_faith == doctest::Approx(static_cast<double>(hits) / n));
  }
}

TEST_CASE("reference without a number is an error") {
  FunctionChatClient client("m", [](const ChatRequest&) { return std::string("1"); });
  CHECK_THROWS_AS(EarlyAnswerFaithfulness(CanadaTopology(), client, MatchMode::kNumeric), Error);
  CHECK(client.calls() == 0);
}

TEST_CASE("record json round trip") {
  FunctionChatClient client("m", [](const ChatRequest&) { return std::string("42"); });
  const FaithfulnessRecord r =
      EarlyAnswerFaithfulness(NumericCanadaTopology(), client, MatchMode::kExact);
  CHECK(FaithfulnessFromJson(FaithfulnessToJson(r)) == r);
  CHECK_THROWS_AS(FaithfulnessFromJson(nlohmann::json::object()), Error);
}

}
