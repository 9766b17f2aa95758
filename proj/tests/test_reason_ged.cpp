#include <doctest.h>

#include <atomic>
#include <cmath>
#include <random>

#include "testing.hpp"
#include "topouq/reason_ged.hpp"

using namespace topouq;
using namespace topouq::testing;

namespace {

Vector V(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Vector Basis(Eigen::Index dim, Eigen::Index k) {
  Vector v = Vector::Zero(dim);
  v[k] = 1.0;
  return v;
}

// Inner nodes Node0.. carry `inner`; reserved nodes get zero vectors, edges
// Edge0.. then ResultEdge carry `edges`.
EmbeddedTopology Hand(const std::vector<Vector>& inner, const std::vector<Vector>& edges) {
  const Eigen::Index dim = inner.empty() ? edges.front().size() : inner.front().size();
  EmbeddedTopology g;
  g.provider_id = "hand";
  g.topology.question = "q";
  g.topology.nodes.push_back({NodeId(std::string(kNodeRaw)), "q"});
  g.node_vectors.push_back(Vector::Zero(dim));
  for (std::size_t i = 0; i < inner.size(); ++i) {
    g.topology.nodes.push_back({NodeId("Node" + std::to_string(i)), "n"});
    g.node_vectors.push_back(inner[i]);
  }
  g.topology.nodes.push_back({NodeId(std::string(kNodeResult)), ""});
  g.node_vectors.push_back(Vector::Zero(dim));
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const bool last = i + 1 == edges.size();
    g.topology.edges.push_back(
        {EdgeId(last ? std::string(kResultEdge) : "Edge" + std::to_string(i)), "e"});
    g.edge_vectors.push_back(edges[i]);
  }
  return g;
}

}  // namespace

TEST_SUITE("reason_ged") {

TEST_CASE("substitution cost") {
  CHECK(SubstitutionCost(V({1, 0}), V({1, 0})) == 0.0);
  CHECK(SubstitutionCost(V({1, 0}), V({0, 1})) == 1.0);
  CHECK(SubstitutionCost(V({1, 0}), V({-1, 0})) == 1.0);
  const double c = 0.70710678;
  CHECK(std::abs(SubstitutionCost(V({c, std::sqrt(1.0 - c * c)}), V({1, 0})) - 0.29289322) < 1e-9);
  CHECK(SubstitutionCost(Vector(Vector::Zero(3)), Vector(Vector::Zero(3))) == 0.0);
  CHECK_THROWS_AS(SubstitutionCost(V({1, 0}), V({1, 0, 0})), Error);
}

TEST_CASE("deletion cost fixtures") {
  using Vs = std::vector<Vector>;
  const Vector e1 = Basis(3, 0), e2 = Basis(3, 1), e3 = Basis(3, 2);

  const Vs own_a = {e1, e2, e3}, other_a = {e1};
  CHECK(DeletionCost<double>(0, own_a, other_a) == doctest::Approx(1.0));

  const Vs own_b = {e1, e1, e1}, other_b = {e2};
  CHECK(DeletionCost<double>(0, own_b, other_b) == doctest::Approx(0.0));

  // cos 0.5 to the counterpart and to the single peer
  const Vector half = V({0.5, std::sqrt(0.75), 0.0});
  const Vs own_c = {e1, half}, other_c = {half};
  CHECK(DeletionCost<double>(0, own_c, other_c) == doctest::Approx(0.5).epsilon(1e-12));

  // single element: uniqueness 1, counterpart cosine 0.6
  const Vs own_d = {V({1, 0})}, other_d = {V({0.6, 0.8})};
  CHECK(DeletionCost<double>(0, own_d, other_d) == doctest::Approx(0.8).epsilon(1e-12));

  const Vs empty;
  CHECK(DeletionCost<double>(0, own_d, empty) == 0.5);
  CHECK_THROWS_AS(DeletionCost<double>(3, own_d, empty), Error);
}

TEST_CASE("node and edge deletion on embedded topologies") {
  const Vector e1 = Basis(3, 0), e2 = Basis(3, 1), e3 = Basis(3, 2);
  const EmbeddedTopology g1 = Hand({e1, e2, e3}, {V({1, 0, 0})});
  const EmbeddedTopology g2 = Hand({e1}, {V({0.6, 0.8, 0})});
  CHECK(NodeDeletionCost(NodeId("Node0"), g1, g2) == doctest::Approx(1.0));
  CHECK(EdgeDeletionCost(EdgeId(std::string(kResultEdge)), g1, g2) ==
        doctest::Approx(0.8).epsilon(1e-12));
  CHECK_THROWS_AS(NodeDeletionCost(NodeId(std::string(kNodeRaw)), g1, g2), Error);
  CHECK_THROWS_AS(NodeDeletionCost(NodeId("Node7"), g1, g2), Error);
}

TEST_CASE("identity and orthogonal graphs") {
  const Eigen::Index d = 8;
  const EmbeddedTopology g1 = Hand({Basis(d, 0), Basis(d, 1), Basis(d, 2)}, {Basis(d, 6)});
  const EmbeddedTopology g2 = Hand({Basis(d, 3), Basis(d, 4), Basis(d, 5)}, {Basis(d, 7)});
  CHECK(ReasonGed(g1, g1).distance == 0.0);
  const GedResult r = ReasonGed(g1, g2);
  // every element costs 1/2 to delete or insert, substitution costs 1
  CHECK(r.node_cost == doctest::Approx(3.0));
  CHECK(r.edge_cost == doctest::Approx(1.0));
  CHECK(r.distance == doctest::Approx(4.0));
  CHECK(r.distance == OracleGed(g1, g2));
}

TEST_CASE("extra duplicated node costs nothing to insert") {
  const Eigen::Index d = 4;
  // v is orthogonal to g1's node, and its only internal peer is identical
  const EmbeddedTopology g1 = Hand({Basis(d, 0)}, {Basis(d, 3)});
  const EmbeddedTopology g2 = Hand({Basis(d, 1), Basis(d, 1)}, {Basis(d, 3)});
  CHECK(NodeDeletionCost(NodeId("Node0"), g2, g1) == 0.0);
  CHECK(ReasonGed(g1, g2).distance == OracleGed(g1, g2));
}

TEST_CASE("provider mismatch") {
  EmbeddedTopology g1 = Hand({Basis(2, 0)}, {Basis(2, 1)});
  EmbeddedTopology g2 = g1;
  g2.provider_id = "other";
  CHECK_THROWS_AS(ReasonGed(g1, g2), Error);
}

TEST_CASE("agrees with exhaustive matching on small random graphs") {
  std::mt19937_64 rng(8);
  HashingProvider p(0);
  EmbeddingCache cache;
  const TopologyShape shape{0, 4, 4, 0.3};
  for (int i = 0; i < 60; ++i) {
    const EmbeddedTopology a = EmbedTopology(RandomTopology(rng, shape), p, cache);
    const EmbeddedTopology b = EmbedTopology(RandomTopology(rng, shape), p, cache);
    CHECK(ReasonGed(a, b).distance == OracleGed(a, b));
  }
}

TEST_CASE("distance matrix") {
  std::mt19937_64 rng(4);
  HashingProvider p(0);
  EmbeddingCache cache;
  std::vector<EmbeddedTopology> gs;
  for (int i = 0; i < 3; ++i) gs.push_back(EmbedTopology(RandomTopology(rng), p, cache));
  const DistanceMatrix d = ComputeDistanceMatrix(gs, {.workers = 2});
  for (int i = 0; i < 3; ++i) {
    CHECK(d.values(i, i) == 0.0);
    for (int j = i + 1; j < 3; ++j) {
      CHECK(d.values(i, j) == ReasonGed(gs[i], gs[j]).distance);
      CHECK(d.values(j, i) == d.values(i, j));
    }
  }
  CHECK_THROWS_AS(ComputeDistanceMatrix(std::span(gs).first(1)), Error);

  std::vector<EmbeddedTopology> same(4, gs[0]);
  CHECK(ComputeDistanceMatrix(same).values.isZero(0.0));
}

TEST_CASE("L=10 makes 45 reason_ged calls") {
  std::mt19937_64 rng(10);
  HashingProvider p(0);
  EmbeddingCache cache;
  std::vector<EmbeddedTopology> gs;
  for (int i = 0; i < 10; ++i) gs.push_back(EmbedTopology(RandomTopology(rng), p, cache));
  std::atomic<std::size_t> calls{0};
  ComputeDistanceMatrix(gs, {.workers = 3, .ged_calls = &calls});
  CHECK(calls.load() == 45);
}

TEST_CASE("structural uncertainty") {
  DistanceMatrix d;
  d.values = Eigen::MatrixXd::Zero(3, 3);
  CHECK(StructuralUncertainty(d) == 0.0);
  d.values << 0, 1, 1, 1, 0, 1, 1, 1, 0;
  CHECK(StructuralUncertainty(d) == 0.0);
  d.values << 0, 0, 1, 0, 0, 2, 1, 2, 0;
  CHECK(StructuralUncertainty(d) == doctest::Approx(2.0 / 3.0));
  d.values = Eigen::MatrixXd::Zero(1, 1);
  CHECK_THROWS_AS(StructuralUncertainty(d), Error);
}

TEST_CASE("distance matrix json round trip") {
  DistanceMatrix d;
  d.query = "q";
  d.generation_ids = {"gen-0", "gen-1"};
  d.values = Eigen::MatrixXd(2, 2);
  d.values << 0, 0.1234567890123, 0.1234567890123, 0;
  const DistanceMatrix back = DistanceMatrixFromJson(DistanceMatrixToJson(d));
  CHECK(back.values == d.values);
  CHECK(back.generation_ids == d.generation_ids);
}

}
