#include <doctest.h>

#include <random>
#include <set>

#include "testing.hpp"
#include "topouq/error.hpp"
#include "topouq/topology.hpp"

using namespace topouq;
using namespace topouq::testing;

namespace {

ErrorKind ParseErrorKind(std::string_view raw, const EdgeGlossary& e = {},
                         const NodeGlossary& n = {}) {
  try {
    ParseStructureText(raw, e, n, "q", "a");
  } catch (const Error& err) {
    return err.kind();
  }
  FAIL("expected a parse error");
  return ErrorKind::kInvalidArgument;
}

}  // namespace

TEST_SUITE("topology") {

TEST_CASE("Canada example parses into 6 nodes, 5 edges, 6 steps") {
  const ReasoningTopology t = CanadaTopology();
  CHECK(t.nodes.size() == 6);
  CHECK(t.edges.size() == 5);
  CHECK(t.steps.size() == 6);
  CHECK(Validate(t).empty());
  CHECK(t.FindNode(NodeId("NodeRaw"))->text == kCanadaQuestion);
  CHECK(t.FindNode(NodeId("NodeResult"))->text == kCanadaAnswer);
  CHECK(t.FindEdge(EdgeId("ResultEdge"))->text == "It is summer in Canada.");
  CHECK(t.steps[3] == Step{NodeId("Node1"), NodeId("Node2"), EdgeId("Edge2")});
}

TEST_CASE("minimal structure") {
  const ReasoningTopology t = ParseStructureText(
      "Structure: {[NodeRaw, NodeResult, ResultEdge]}; ResultEdge: done.;}", {}, {}, "q", "done.");
  CHECK(t.nodes.size() == 2);
  CHECK(t.edges.size() == 1);
  CHECK(t.steps.size() == 1);
  CHECK(Validate(t).empty());
}

TEST_CASE("parse errors") {
  CHECK(ParseErrorKind("Structure: {[Node0, Node1, Edge0]}") == ErrorKind::kMissingNodeRaw);
  CHECK(ParseErrorKind("Structure: {[NodeRaw, Node0, Edge0]}", {{EdgeId("Edge0"), "k"}},
                       {{NodeId("Node0"), "a"}}) == ErrorKind::kMissingNodeResult);
  CHECK(ParseErrorKind("Structure: {[NodeRaw, Node9, Edge0], [Node9, NodeResult, ResultEdge]}",
                       {{EdgeId("Edge0"), "k"}}) == ErrorKind::kUnresolvedId);
  CHECK(ParseErrorKind("Structure: {[NodeRaw, NodeResult]}") == ErrorKind::kMalformedTriple);
  CHECK(ParseErrorKind("no block here") == ErrorKind::kMalformedTriple);
}

TEST_CASE("ids are trimmed, duplicate triples collapse, isolated entries stay") {
  EdgeGlossary e = {{EdgeId("Edge0"), "k0"}, {EdgeId("Edge1"), "k1"}};
  NodeGlossary n = {{NodeId("Node0"), "a0"}, {NodeId("Node1"), "a1"}};
  const ReasoningTopology t = ParseStructureText(
      "structure: {[ NodeRaw ,Node0,  Edge0 ], [NodeRaw, Node0, Edge0], "
      "[Node0, NodeResult, ResultEdge]}; ResultEdge: fin;}",
      e, n, "q", "fin");
  CHECK(t.steps.size() == 2);
  CHECK(t.FindNode(NodeId("Node1")) != nullptr);
  CHECK(t.FindEdge(EdgeId("Edge1")) != nullptr);
  CHECK(Validate(t).empty());
}

TEST_CASE("validate reports named violations") {
  ReasoningTopology t = CanadaTopology();
  t.nodes.push_back({NodeId("Node0"), "again"});
  const auto v = Validate(t);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == Violation{ViolationKind::kDuplicateId, "Node0"});

  ReasoningTopology loop = CanadaTopology();
  loop.steps.push_back({NodeId("Node2"), NodeId("Node2"), EdgeId("Edge2")});
  const auto w = Validate(loop);
  REQUIRE(w.size() == 1);
  CHECK(w[0].kind == ViolationKind::kSelfLoop);
}

TEST_CASE("emission order") {
  const ReasoningTopology t = CanadaTopology();
  const auto steps = EmissionOrderSteps(t);
  REQUIRE(steps.size() == 6);
  CHECK(steps.front() == Step{NodeId("NodeRaw"), NodeId("Node0"), EdgeId("Edge0")});
  CHECK(steps == t.steps);
  CHECK(EmissionOrderSteps(FromRecord(ToRecord(t))) == steps);
}

TEST_CASE("record round trip over random topologies") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const ReasoningTopology t = RandomTopology(rng);
    REQUIRE(Validate(t).empty());
    const ReasoningTopology back = FromRecord(ToRecord(t));
    CHECK(back == t);
    CHECK(FromRecord(nlohmann::json::parse(ToRecord(t).dump())) == t);
  }
}

TEST_CASE("record schema") {
  nlohmann::json r = ToRecord(CanadaTopology());
  r.erase("steps");
  CHECK_THROWS_AS(FromRecord(r), Error);
  try {
    FromRecord(r);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kSchemaViolation);
  }

  nlohmann::json extra = ToRecord(CanadaTopology());
  extra["source"] = "run-7";
  const ReasoningTopology t = FromRecord(extra);
  CHECK(t.metadata["extra_fields"]["source"] == "run-7");
}

TEST_CASE("parsing is total over its error set") {
  // Random single-character edits of the Canada structure either parse into a
  // valid topology or fail with one of the parser's own error kinds.
  const std::set<ErrorKind> allowed = {ErrorKind::kMissingNodeRaw, ErrorKind::kMissingNodeResult,
                                       ErrorKind::kUnresolvedId, ErrorKind::kMalformedTriple};
  const std::string alphabet = "[]{},;: NodeRawResultEdg0123456789";
  std::mt19937_64 rng(5);
  int parsed = 0, failed = 0;
  for (int i = 0; i < 2000; ++i) {
    std::string s = kCanadaStructure;
    const int edits = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < edits; ++k) {
      const std::size_t pos = rng() % s.size();
      switch (rng() % 3) {
        case 0: s.erase(pos, 1); break;
        case 1: s.insert(pos, 1, alphabet[rng() % alphabet.size()]); break;
        default: s[pos] = alphabet[rng() % alphabet.size()];
      }
    }
    try {
      const ReasoningTopology t = ParseStructureText(s, CanadaEdges(), CanadaNodes(), "q", "a");
      CHECK(Validate(t).empty());
      ++parsed;
    } catch (const Error& e) {
      CHECK(allowed.count(e.kind()) == 1);
      ++failed;
    }
  }
  CHECK(parsed > 0);
  CHECK(failed > 0);
}

TEST_CASE("ResultEdge clause extraction") {
  CHECK(ExtractResultEdgeText(kCanadaStructure) == std::optional<std::string>(kCanadaAnswer));
  CHECK_FALSE(ExtractResultEdgeText("Structure: {[NodeRaw, NodeResult, ResultEdge]}").has_value());
}

}
