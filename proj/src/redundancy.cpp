#include "topouq/redundancy.hpp"

#include <algorithm>
#include <map>

namespace topouq {
namespace {

// Distinct successors per node index, in first-emission order.
std::vector<std::vector<std::size_t>> Successors(const ReasoningTopology& t) {
  std::vector<std::vector<std::size_t>> out(t.nodes.size());
  for (const Step& s : t.steps) {
    const auto from = t.NodeIndex(s.from);
    const auto to = t.NodeIndex(s.to);
    if (!from || !to) continue;
    auto& succ = out[*from];
    if (std::find(succ.begin(), succ.end(), *to) == succ.end()) succ.push_back(*to);
  }
  return out;
}

class PathSearch {
 public:
  PathSearch(const ReasoningTopology& t, std::size_t max_paths)
      : t_(t), succ_(Successors(t)), on_stack_(t.nodes.size(), false),
        max_paths_(max_paths) {}

  PathEnumeration Run() {
    const auto raw = t_.NodeIndex(NodeId(std::string(kNodeRaw)));
    const auto result = t_.NodeIndex(NodeId(std::string(kNodeResult)));
    if (raw && result) {
      target_ = *result;
      Visit(*raw);
    }
    return std::move(out_);
  }

 private:
  void Visit(std::size_t v) {
    if (out_.truncated) return;
    stack_.push_back(v);
    on_stack_[v] = true;
    if (v == target_) {
      if (out_.paths.size() >= max_paths_) {
        out_.truncated = true;
      } else {
        NodePath path;
        for (std::size_t i : stack_) path.push_back(t_.nodes[i].id);
        out_.paths.push_back(std::move(path));
      }
    } else {
      for (std::size_t w : succ_[v]) {
        if (!on_stack_[w]) Visit(w);
      }
    }
    on_stack_[v] = false;
    stack_.pop_back();
  }

  const ReasoningTopology& t_;
  std::vector<std::vector<std::size_t>> succ_;
  std::vector<bool> on_stack_;
  std::vector<std::size_t> stack_;
  std::size_t target_ = 0;
  std::size_t max_paths_;
  PathEnumeration out_;
};

}  // namespace

PathEnumeration ValidPaths(const ReasoningTopology& t, std::size_t max_paths) {
  return PathSearch(t, max_paths).Run();
}

RedundancyReport ComputeRedundancy(const ReasoningTopology& t, std::size_t max_paths) {
  RedundancyReport r;
  PathEnumeration found = ValidPaths(t, max_paths);
  r.valid_paths = std::move(found.paths);
  r.paths_truncated = found.truncated;
  r.result_reachable = !r.valid_paths.empty();
  r.node_count = t.nodes.size();
  r.edge_count = t.edges.size();

  std::set<NodeId> on_path;
  std::set<std::pair<NodeId, NodeId>> hops;
  for (const NodePath& p : r.valid_paths) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      on_path.insert(p[i]);
      if (i + 1 < p.size()) hops.emplace(p[i], p[i + 1]);
    }
  }
  std::set<EdgeId> edges_on_path;
  for (const Step& s : t.steps) {
    if (hops.count({s.from, s.to}) > 0) edges_on_path.insert(s.edge);
  }

  for (const Node& n : t.nodes) {
    if (on_path.count(n.id) > 0) continue;
    // With no valid path at all, the reserved endpoints are not counted.
    if (!r.result_reachable && IsReservedNode(n.id)) continue;
    r.redundant_nodes.insert(n.id);
  }
  for (const Edge& e : t.edges) {
    if (edges_on_path.count(e.id) == 0) r.redundant_edges.insert(e.id);
  }

  // Dead branches: chains p -> k -> ... where Out(p) = {k} and both ends
  // lie on no valid path.
  const auto succ = Successors(t);
  std::vector<long> next(t.nodes.size(), -1);
  std::vector<bool> is_target(t.nodes.size(), false);
  for (std::size_t p = 0; p < t.nodes.size(); ++p) {
    if (succ[p].size() != 1) continue;
    const std::size_t k = succ[p].front();
    if (on_path.count(t.nodes[p].id) > 0 || on_path.count(t.nodes[k].id) > 0) continue;
    next[p] = static_cast<long>(k);
    is_target[k] = true;
  }
  std::vector<bool> visited(t.nodes.size(), false);
  auto walk = [&](std::size_t start) {
    NodePath chain;
    std::vector<bool> in_chain(t.nodes.size(), false);
    std::size_t v = start;
    while (true) {
      chain.push_back(t.nodes[v].id);
      in_chain[v] = true;
      visited[v] = true;
      if (next[v] < 0) break;
      const auto w = static_cast<std::size_t>(next[v]);
      if (in_chain[w]) break;
      v = w;
    }
    r.dead_branches.push_back(std::move(chain));
  };
  for (std::size_t p = 0; p < t.nodes.size(); ++p) {
    if (next[p] >= 0 && !is_target[p]) walk(p);
  }
  // Pure cycles have no entry point; start them at their first node.
  for (std::size_t p = 0; p < t.nodes.size(); ++p) {
    if (next[p] >= 0 && !visited[p]) walk(p);
  }

  r.node_rate = r.node_count == 0 ? 0.0
                                  : static_cast<double>(r.redundant_nodes.size()) /
                                        static_cast<double>(r.node_count);
  r.edge_rate = r.edge_count == 0 ? 0.0
                                  : static_cast<double>(r.redundant_edges.size()) /
                                        static_cast<double>(r.edge_count);
  return r;
}

nlohmann::json RedundancyToJson(const RedundancyReport& r) {
  auto path_json = [](const NodePath& p) {
    nlohmann::json a = nlohmann::json::array();
    for (const NodeId& id : p) a.push_back(id.value);
    return a;
  };
  nlohmann::json paths = nlohmann::json::array();
  for (const NodePath& p : r.valid_paths) paths.push_back(path_json(p));
  nlohmann::json dead = nlohmann::json::array();
  for (const NodePath& p : r.dead_branches) dead.push_back(path_json(p));
  nlohmann::json nodes = nlohmann::json::array();
  for (const NodeId& id : r.redundant_nodes) nodes.push_back(id.value);
  nlohmann::json edges = nlohmann::json::array();
  for (const EdgeId& id : r.redundant_edges) edges.push_back(id.value);
  return {{"valid_paths", paths},
          {"paths_truncated", r.paths_truncated},
          {"result_reachable", r.result_reachable},
          {"redundant_nodes", nodes},
          {"redundant_edges", edges},
          {"dead_branches", dead},
          {"node_count", r.node_count},
          {"edge_count", r.edge_count},
          {"node_rate", r.node_rate},
          {"edge_rate", r.edge_rate}};
}

}  // namespace topouq
