#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "topouq/topology.hpp"

namespace topouq {

using NodePath = std::vector<NodeId>;

struct PathEnumeration {
  std::vector<NodePath> paths;
  bool truncated = false;  // hit max_paths before exhausting the search
};

inline constexpr std::size_t kDefaultMaxPaths = 10000;

// Simple paths (no repeated node) from NodeRaw to NodeResult, depth-first in
// step emission order. Parallel steps between the same two nodes yield one
// path.
PathEnumeration ValidPaths(const ReasoningTopology& t,
                           std::size_t max_paths = kDefaultMaxPaths);

struct RedundancyReport {
  std::vector<NodePath> valid_paths;
  bool paths_truncated = false;
  bool result_reachable = true;  // false is the NoValidPath warning
  std::set<NodeId> redundant_nodes;
  std::set<EdgeId> redundant_edges;
  std::vector<NodePath> dead_branches;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  double node_rate = 0.0;  // |redundant_nodes| / |V|, reserved nodes counted in |V|
  double edge_rate = 0.0;  // |redundant_edges| / |E|, ResultEdge counted in |E|
};

RedundancyReport ComputeRedundancy(const ReasoningTopology& t,
                                   std::size_t max_paths = kDefaultMaxPaths);

nlohmann::json RedundancyToJson(const RedundancyReport& r);

}  // namespace topouq
