#include "topouq/reason_ged.hpp"

#include "topouq/parallel.hpp"

namespace topouq {

CostMatrix BuildAugmentedMatrix(const Eigen::MatrixXd& substitution,
                                std::span<const double> deletion,
                                std::span<const double> insertion) {
  const auto n1 = static_cast<Eigen::Index>(deletion.size());
  const auto n2 = static_cast<Eigen::Index>(insertion.size());
  if (substitution.rows() != n1 || substitution.cols() != n2) {
    throw Error(ErrorKind::kShapeMismatch,
                "substitution block is " + std::to_string(substitution.rows()) + "x" +
                    std::to_string(substitution.cols()) + ", expected " +
                    std::to_string(n1) + "x" + std::to_string(n2));
  }
  CostMatrix c;
  c.n_left = n1;
  c.n_right = n2;
  c.values = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
  c.values.topLeftCorner(n1, n2) = substitution;
  c.values.topRightCorner(n1, n1).setConstant(kForbiddenCost);
  c.values.bottomLeftCorner(n2, n2).setConstant(kForbiddenCost);
  for (Eigen::Index i = 0; i < n1; ++i) c.values(i, n2 + i) = deletion[i];
  for (Eigen::Index j = 0; j < n2; ++j) c.values(n1 + j, j) = insertion[j];
  return c;
}

AssignmentResult SolveAssignment(const CostMatrix& c) {
  const Eigen::Index n1 = c.n_left;
  const Eigen::Index n2 = c.n_right;
  if (c.values.rows() != n1 + n2 || c.values.cols() != n1 + n2) {
    throw Error(ErrorKind::kShapeMismatch, "cost matrix does not match n1 + n2");
  }
  const Assignment<double> a = SolveLinearAssignment(c.values);

  AssignmentResult out;
  out.total_cost = a.cost;
  std::vector<bool> right_matched(static_cast<std::size_t>(n2), false);
  for (Eigen::Index i = 0; i < n1 + n2; ++i) {
    const Eigen::Index j = a.col_for_row[static_cast<std::size_t>(i)];
    if (c.values(i, j) >= kForbiddenCost) {
      throw Error(ErrorKind::kInfeasible, "optimal assignment uses a forbidden entry");
    }
    if (i < n1 && j < n2) {
      out.matching.pairs.emplace_back(i, j);
      right_matched[static_cast<std::size_t>(j)] = true;
    } else if (i < n1) {
      out.matching.unmatched_left.push_back(i);
    }
  }
  for (Eigen::Index j = 0; j < n2; ++j) {
    if (!right_matched[static_cast<std::size_t>(j)]) out.matching.unmatched_right.push_back(j);
  }
  return out;
}

std::vector<std::size_t> MatchableNodeIndices(const ReasoningTopology& t) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    if (!IsReservedNode(t.nodes[i].id)) out.push_back(i);
  }
  return out;
}

namespace {

struct ElementSet {
  std::vector<Vector> vectors;
  std::vector<std::size_t> source_index;
};

ElementSet MatchableNodes(const EmbeddedTopology& g) {
  ElementSet s;
  for (std::size_t i : MatchableNodeIndices(g.topology)) {
    s.vectors.push_back(g.node_vectors[i]);
    s.source_index.push_back(i);
  }
  return s;
}

ElementSet AllEdges(const EmbeddedTopology& g) {
  ElementSet s;
  s.vectors = g.edge_vectors;
  for (std::size_t i = 0; i < g.edge_vectors.size(); ++i) s.source_index.push_back(i);
  return s;
}

struct Aligned {
  double cost = 0.0;
  Matching matching;
};

Aligned Align(const ElementSet& left, const ElementSet& right) {
  const std::size_t n1 = left.vectors.size();
  const std::size_t n2 = right.vectors.size();
  const std::span<const Vector> lv(left.vectors);
  const std::span<const Vector> rv(right.vectors);

  Eigen::MatrixXd sub(n1, n2);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      sub(i, j) = SubstitutionCost(left.vectors[i], right.vectors[j]);
    }
  }
  std::vector<double> del(n1), ins(n2);
  for (std::size_t i = 0; i < n1; ++i) del[i] = DeletionCost<double>(i, lv, rv);
  for (std::size_t j = 0; j < n2; ++j) ins[j] = DeletionCost<double>(j, rv, lv);

  const AssignmentResult solved = SolveAssignment(BuildAugmentedMatrix(sub, del, ins));

  Aligned out;
  out.cost = solved.total_cost;
  for (const auto& [i, j] : solved.matching.pairs) {
    out.matching.pairs.emplace_back(left.source_index[i], right.source_index[j]);
  }
  for (Eigen::Index i : solved.matching.unmatched_left) {
    out.matching.unmatched_left.push_back(left.source_index[i]);
  }
  for (Eigen::Index j : solved.matching.unmatched_right) {
    out.matching.unmatched_right.push_back(right.source_index[j]);
  }
  return out;
}

void CheckCompatible(const EmbeddedTopology& g1, const EmbeddedTopology& g2) {
  if (g1.provider_id != g2.provider_id) {
    throw Error(ErrorKind::kProviderMismatch,
                "'" + g1.provider_id + "' vs '" + g2.provider_id + "'");
  }
}

std::size_t PositionOf(const std::vector<std::size_t>& source, std::size_t idx) {
  auto it = std::find(source.begin(), source.end(), idx);
  return static_cast<std::size_t>(it - source.begin());
}

}  // namespace

double NodeDeletionCost(const NodeId& v, const EmbeddedTopology& g1,
                        const EmbeddedTopology& g2) {
  CheckCompatible(g1, g2);
  const auto idx = g1.topology.NodeIndex(v);
  if (!idx || IsReservedNode(v)) {
    throw Error(ErrorKind::kUnknownId, "no matchable node '" + v.value + "'");
  }
  const ElementSet own = MatchableNodes(g1);
  const ElementSet other = MatchableNodes(g2);
  return DeletionCost<double>(PositionOf(own.source_index, *idx), own.vectors,
                              other.vectors);
}

double EdgeDeletionCost(const EdgeId& e, const EmbeddedTopology& g1,
                        const EmbeddedTopology& g2) {
  CheckCompatible(g1, g2);
  const auto idx = g1.topology.EdgeIndex(e);
  if (!idx) throw Error(ErrorKind::kUnknownId, "no edge '" + e.value + "'");
  return DeletionCost<double>(*idx, g1.edge_vectors, g2.edge_vectors);
}

GedResult ReasonGed(const EmbeddedTopology& g1, const EmbeddedTopology& g2) {
  CheckCompatible(g1, g2);
  if (g1.dimension() != 0 && g2.dimension() != 0 && g1.dimension() != g2.dimension()) {
    throw Error(ErrorKind::kDimensionMismatch, "topologies embedded with different dimensions");
  }
  Aligned nodes = Align(MatchableNodes(g1), MatchableNodes(g2));
  Aligned edges = Align(AllEdges(g1), AllEdges(g2));

  GedResult r;
  r.node_cost = nodes.cost;
  r.edge_cost = edges.cost;
  r.distance = nodes.cost + edges.cost;
  r.node_matching = std::move(nodes.matching);
  r.edge_matching = std::move(edges.matching);
  return r;
}

DistanceMatrix ComputeDistanceMatrix(std::span<const EmbeddedTopology> gs,
                                     const DistanceOptions& options) {
  const std::size_t n = gs.size();
  if (n < 2) {
    throw Error(ErrorKind::kTooFewGenerations,
                "need at least 2 generations, got " + std::to_string(n));
  }
  DistanceMatrix d;
  d.query = gs.front().topology.question;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& meta = gs[i].topology.metadata;
    if (meta.contains("generation")) {
      d.generation_ids.push_back("gen-" + meta["generation"].dump());
    } else {
      d.generation_ids.push_back("gen-" + std::to_string(i));
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> values(pairs.size());
  ParallelFor(pairs.size(), options.workers, [&](std::size_t k) {
    values[k] = ReasonGed(gs[pairs[k].first], gs[pairs[k].second]).distance;
    if (options.ged_calls != nullptr) options.ged_calls->fetch_add(1);
  });

  d.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(pairs[k].first);
    const auto j = static_cast<Eigen::Index>(pairs[k].second);
    d.values(i, j) = values[k];
    d.values(j, i) = values[k];
  }
  return d;
}

double StructuralUncertainty(const DistanceMatrix& d) {
  return UpperTriangleVariance(d.values);
}

nlohmann::json DistanceMatrixToJson(const DistanceMatrix& d) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < d.values.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(d.values.cols()));
    for (Eigen::Index j = 0; j < d.values.cols(); ++j) row[static_cast<std::size_t>(j)] = d.values(i, j);
    rows.push_back(row);
  }
  return {{"query", d.query}, {"generation_ids", d.generation_ids}, {"values", rows}};
}

DistanceMatrix DistanceMatrixFromJson(const nlohmann::json& j) {
  try {
    DistanceMatrix d;
    d.query = j.at("query").get<std::string>();
    d.generation_ids = j.at("generation_ids").get<std::vector<std::string>>();
    const auto rows = j.at("values").get<std::vector<std::vector<double>>>();
    const auto n = static_cast<Eigen::Index>(rows.size());
    d.values.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      if (static_cast<Eigen::Index>(rows[r].size()) != n) {
        throw Error(ErrorKind::kSchemaViolation, "distance matrix is not square");
      }
      for (Eigen::Index c = 0; c < n; ++c) d.values(r, c) = rows[r][c];
    }
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchemaViolation, std::string("distance matrix: ") + e.what());
  }
}

}  // namespace topouq
