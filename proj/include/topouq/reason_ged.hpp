#pragma once

// Reason-GED: a graph edit distance between two embedded reasoning
// topologies. Substitution prices semantic disagreement of matched elements;
// deletion/insertion prices an unmatched element by how well it could have
// been matched across graphs and how unique it is inside its own graph.
// Nodes and edges are aligned as two independent bipartite assignment
// problems over augmented (n1 + n2) square cost matrices.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "topouq/assignment.hpp"
#include "topouq/embedding.hpp"

namespace topouq {

// Off-diagonal entries of the deletion/insertion blocks. Larger than any
// feasible assignment total because every finite cost lies in [0, 1].
inline constexpr double kForbiddenCost = 1e6;

template <typename Scalar>
Scalar ClampedCosine(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& a,
                     const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b) {
  return std::clamp(Cosine(a, b), Scalar(0), Scalar(1));
}

// 1 - clamp(cos(x, y), 0, 1). Bitwise-equal vectors (including two zero
// vectors from two empty texts) cost exactly nothing.
template <typename Scalar>
Scalar SubstitutionCost(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
                        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "substitution between different dimensions");
  }
  if (x == y) return Scalar(0);
  return Scalar(1) - ClampedCosine(x, y);
}

// Deletion cost of own[index] relative to `other`:
//   0.5 * (max_j clamp(cos(own[index], other[j]))
//          + 1 - mean_{k != index} clamp(cos(own[index], own[k])))
// The uniqueness term is 1 when `own` has a single element; the matching
// term is 0 when `other` is empty. Insertion uses the same formula with the
// graphs swapped.
template <typename Scalar>
Scalar DeletionCost(std::size_t index,
                    std::span<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> own,
                    std::span<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> other) {
  if (index >= own.size()) {
    throw Error(ErrorKind::kUnknownId, "deletion index out of range");
  }
  const auto& x = own[index];
  Scalar matching(0);
  for (const auto& y : other) matching = std::max(matching, ClampedCosine(x, y));

  Scalar uniqueness(1);
  if (own.size() > 1) {
    Scalar total(0);
    for (std::size_t k = 0; k < own.size(); ++k) {
      if (k != index) total += ClampedCosine(x, own[k]);
    }
    uniqueness = Scalar(1) - total / static_cast<Scalar>(own.size() - 1);
  }
  return Scalar(0.5) * (matching + uniqueness);
}

struct CostMatrix {
  Eigen::Index n_left = 0;   // n1: elements of the first graph
  Eigen::Index n_right = 0;  // n2: elements of the second graph
  Eigen::MatrixXd values;    // (n1 + n2) x (n1 + n2)
};

// [ sub (n1 x n2)          | diag(del), forbidden elsewhere (n1 x n1) ]
// [ diag(ins), forbidden   | zeros (n2 x n1)                          ]
CostMatrix BuildAugmentedMatrix(const Eigen::MatrixXd& substitution,
                                std::span<const double> deletion,
                                std::span<const double> insertion);

struct Matching {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  std::vector<Eigen::Index> unmatched_left;
  std::vector<Eigen::Index> unmatched_right;
};

struct AssignmentResult {
  Matching matching;
  double total_cost = 0.0;
};

// Throws Error(kInfeasible) if the optimum uses a forbidden entry.
AssignmentResult SolveAssignment(const CostMatrix& c);

struct GedResult {
  double distance = 0.0;
  double node_cost = 0.0;
  double edge_cost = 0.0;
  // Indices refer to topology.nodes / topology.edges of each graph.
  Matching node_matching;
  Matching edge_matching;
};

// Elements that take part in node matching: every node except NodeRaw and
// NodeResult. All edges (ResultEdge included) take part in edge matching.
std::vector<std::size_t> MatchableNodeIndices(const ReasoningTopology& t);

double NodeDeletionCost(const NodeId& v, const EmbeddedTopology& g1,
                        const EmbeddedTopology& g2);
double EdgeDeletionCost(const EdgeId& e, const EmbeddedTopology& g1,
                        const EmbeddedTopology& g2);

GedResult ReasonGed(const EmbeddedTopology& g1, const EmbeddedTopology& g2);

struct DistanceMatrix {
  std::string query;
  std::vector<std::string> generation_ids;
  Eigen::MatrixXd values;
};

struct DistanceOptions {
  std::size_t workers = 1;
  // When set, incremented once per ReasonGed evaluation.
  std::atomic<std::size_t>* ged_calls = nullptr;
};

// Throws Error(kTooFewGenerations) for fewer than two topologies.
DistanceMatrix ComputeDistanceMatrix(std::span<const EmbeddedTopology> gs,
                                     const DistanceOptions& options = {});

// Population variance of the strict upper triangle.
double StructuralUncertainty(const DistanceMatrix& d);

// Population variance of the strict upper triangle of any square matrix.
template <typename Derived>
typename Derived::Scalar UpperTriangleVariance(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = m.rows();
  if (n < 2 || m.cols() != n) {
    throw Error(ErrorKind::kTooFewGenerations, "need a square matrix of size >= 2");
  }
  Scalar sum(0);
  Scalar lo = m(0, 1);
  Scalar hi = m(0, 1);
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      sum += m(i, j);
      lo = std::min(lo, m(i, j));
      hi = std::max(hi, m(i, j));
      ++count;
    }
  }
  if (lo == hi) return Scalar(0);
  const Scalar mean = sum / static_cast<Scalar>(count);
  Scalar ss(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Scalar d = m(i, j) - mean;
      ss += d * d;
    }
  }
  return ss / static_cast<Scalar>(count);
}

nlohmann::json DistanceMatrixToJson(const DistanceMatrix& d);
DistanceMatrix DistanceMatrixFromJson(const nlohmann::json& j);

}  // namespace topouq
