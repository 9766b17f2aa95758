#include <doctest.h>

#include <random>

#include "testing.hpp"
#include "topouq/redundancy.hpp"

using namespace topouq;
using namespace topouq::testing;

namespace {

NodePath P(std::initializer_list<const char*> ids) {
  NodePath p;
  for (const char* id : ids) p.emplace_back(id);
  return p;
}

ReasoningTopology Build(const std::vector<std::array<const char*, 3>>& steps) {
  ReasoningTopology t;
  t.question = "q";
  t.answer = "a";
  auto add_node = [&](const char* id) {
    if (t.FindNode(NodeId(id))) return;
    const std::string s(id);
    t.nodes.push_back({NodeId(s), s == kNodeRaw ? "q" : (s == kNodeResult ? "a" : s)});
  };
  for (const auto& [from, to, edge] : steps) {
    add_node(from);
    add_node(to);
    if (!t.FindEdge(EdgeId(edge))) {
      t.edges.push_back({EdgeId(edge), std::string(edge) == kResultEdge ? "a" : edge});
    }
    t.steps.push_back({NodeId(from), NodeId(to), EdgeId(edge)});
  }
  return t;
}

// Simple paths by brute force: extend every partial path by every step.
std::set<NodePath> OraclePaths(const ReasoningTopology& t) {
  std::set<NodePath> done;
  std::vector<NodePath> frontier = {P({"NodeRaw"})};
  while (!frontier.empty()) {
    NodePath p = frontier.back();
    frontier.pop_back();
    if (p.back().value == kNodeResult) {
      done.insert(p);
      continue;
    }
    for (const Step& s : t.steps) {
      if (s.from != p.back()) continue;
      if (std::find(p.begin(), p.end(), s.to) != p.end()) continue;
      NodePath q = p;
      q.push_back(s.to);
      frontier.push_back(q);
    }
  }
  return done;
}

}  // namespace

TEST_SUITE("redundancy") {

TEST_CASE("Canada example has two valid paths and no redundancy") {
  const RedundancyReport r = ComputeRedundancy(CanadaTopology());
  REQUIRE(r.valid_paths.size() == 2);
  CHECK(r.valid_paths[0] == P({"NodeRaw", "Node0", "Node2", "Node3", "NodeResult"}));
  CHECK(r.valid_paths[1] == P({"NodeRaw", "Node1", "Node2", "Node3", "NodeResult"}));
  CHECK(r.node_rate == 0.0);
  CHECK(r.edge_rate == 0.0);
  CHECK(r.dead_branches.empty());
}

TEST_CASE("dangling node") {
  ReasoningTopology t = CanadaTopology();
  t.nodes.insert(t.nodes.end() - 1, {NodeId("Node4"), "a dangling fact"});
  t.edges.insert(t.edges.end() - 1, {EdgeId("Edge4"), "a dangling question"});
  t.steps.push_back({NodeId("Node2"), NodeId("Node4"), EdgeId("Edge4")});
  REQUIRE(Validate(t).empty());
  const RedundancyReport r = ComputeRedundancy(t);
  CHECK(r.redundant_nodes == std::set<NodeId>{NodeId("Node4")});
  CHECK(r.node_count == 7);
  CHECK(r.node_rate == 1.0 / 7.0);
  CHECK(r.redundant_edges == std::set<EdgeId>{EdgeId("Edge4")});
  CHECK(r.edge_rate == 1.0 / 6.0);
}

TEST_CASE("dead branch") {
  const ReasoningTopology t = Build({{"NodeRaw", "A", "E0"},
                                     {"A", "B", "E1"},
                                     {"NodeRaw", "NodeResult", "ResultEdge"}});
  const RedundancyReport r = ComputeRedundancy(t);
  CHECK(r.valid_paths.size() == 1);
  REQUIRE(r.dead_branches.size() == 1);
  CHECK(r.dead_branches[0] == P({"A", "B"}));
  CHECK(r.node_rate == 0.5);
}

TEST_CASE("minimal and unreachable") {
  const RedundancyReport one = ComputeRedundancy(Build({{"NodeRaw", "NodeResult", "ResultEdge"}}));
  CHECK(one.valid_paths == std::vector<NodePath>{P({"NodeRaw", "NodeResult"})});

  ReasoningTopology t = Build({{"NodeRaw", "A", "E0"}, {"B", "NodeResult", "ResultEdge"}});
  const RedundancyReport r = ComputeRedundancy(t);
  CHECK(r.valid_paths.empty());
  CHECK_FALSE(r.result_reachable);
  CHECK(r.redundant_nodes == std::set<NodeId>{NodeId("A"), NodeId("B")});
}

TEST_CASE("cycles terminate and truncation is flagged") {
  const ReasoningTopology t = Build({{"NodeRaw", "A", "E0"},
                                     {"A", "B", "E1"},
                                     {"B", "A", "E2"},
                                     {"B", "NodeResult", "ResultEdge"},
                                     {"NodeRaw", "B", "E3"}});
  const RedundancyReport r = ComputeRedundancy(t);
  // Raw-A-B-Result and Raw-B-Result; the B->A step never helps
  CHECK(r.valid_paths.size() == 2);
  CHECK(r.redundant_nodes.empty());
  CHECK(ValidPaths(t, 1).truncated);
  CHECK(ValidPaths(t, 1).paths.size() == 1);
}

TEST_CASE("paths match brute force and pruning preserves them") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const ReasoningTopology t = RandomTopology(rng, {0, 6, 6, 0.8});
    const RedundancyReport r = ComputeRedundancy(t);
    const std::set<NodePath> found(r.valid_paths.begin(), r.valid_paths.end());
    CHECK(found.size() == r.valid_paths.size());
    CHECK(found == OraclePaths(t));
    CHECK(r.node_rate >= 0.0);
    CHECK(r.node_rate <= 1.0);
    CHECK((r.node_rate == 0.0) == r.redundant_nodes.empty());

    ReasoningTopology pruned = t;
    std::erase_if(pruned.steps, [&](const Step& s) {
      return r.redundant_nodes.count(s.from) > 0 || r.redundant_nodes.count(s.to) > 0;
    });
    std::erase_if(pruned.nodes, [&](const Node& n) { return r.redundant_nodes.count(n.id) > 0; });
    CHECK(ValidPaths(pruned).paths == r.valid_paths);
  }
}

}
