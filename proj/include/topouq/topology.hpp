#pragma once

// Reasoning topology data model: sub-answers are nodes, sub-questions are
// edges, and a step [from, to, edge] is one logical transition. Two nodes
// are reserved: NodeRaw (the question itself) and NodeResult (the final
// answer). ResultEdge is the reserved edge that carries the concluding
// statement.

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace topouq {

template <typename Tag>
struct StrongId {
  std::string value;

  StrongId() = default;
  explicit StrongId(std::string v) : value(std::move(v)) {}

  bool empty() const { return value.empty(); }
  auto operator<=>(const StrongId&) const = default;
  bool operator==(const StrongId&) const = default;
};

struct NodeIdTag {};
struct EdgeIdTag {};
using NodeId = StrongId<NodeIdTag>;
using EdgeId = StrongId<EdgeIdTag>;

inline constexpr std::string_view kNodeRaw = "NodeRaw";
inline constexpr std::string_view kNodeResult = "NodeResult";
inline constexpr std::string_view kResultEdge = "ResultEdge";

bool IsReservedNode(const NodeId& id);

struct Node {
  NodeId id;
  std::string text;
  bool operator==(const Node&) const = default;
};

struct Edge {
  EdgeId id;
  std::string text;
  bool operator==(const Edge&) const = default;
};

struct Step {
  NodeId from;
  NodeId to;
  EdgeId edge;
  bool operator==(const Step&) const = default;
};

struct ReasoningTopology {
  std::string question;
  std::string answer;
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<Step> steps;  // emission order
  nlohmann::json metadata = nlohmann::json::object();

  bool operator==(const ReasoningTopology&) const = default;

  const Node* FindNode(const NodeId& id) const;
  const Edge* FindEdge(const EdgeId& id) const;
  std::optional<std::size_t> NodeIndex(const NodeId& id) const;
  std::optional<std::size_t> EdgeIndex(const EdgeId& id) const;
};

// An ordered id -> text glossary (insertion order is kept so that isolated
// entries end up in a stable position).
using NodeGlossary = std::vector<std::pair<NodeId, std::string>>;
using EdgeGlossary = std::vector<std::pair<EdgeId, std::string>>;

// Parses a `Structure: {[A, B, E], ...}; ResultEdge: text;}` block into a
// validated topology. Throws Error with kind MissingNodeRaw, MissingNodeResult,
// UnresolvedId or MalformedTriple; never returns an invalid topology.
ReasoningTopology ParseStructureText(std::string_view raw,
                                     const EdgeGlossary& edge_glossary,
                                     const NodeGlossary& node_glossary,
                                     std::string_view question,
                                     std::string_view answer);

// Returns the text of the `ResultEdge:` clause, if the block has one.
std::optional<std::string> ExtractResultEdgeText(std::string_view raw);

enum class ViolationKind {
  kEmptyId,
  kDuplicateId,
  kMissingNodeRaw,
  kMissingNodeResult,
  kDuplicateReserved,
  kSelfLoop,
  kUnresolvedStepId,
  kNoStepFromRaw,
  kNoStepToResult,
  kEmptyText,
  kTextMismatch,
};

std::string_view ViolationKindName(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string id;  // offending id, empty when the violation is global
  bool operator==(const Violation&) const = default;
};

std::vector<Violation> Validate(const ReasoningTopology& t);

// The canonical s_1..s_n sequence: steps in stored emission order.
std::vector<Step> EmissionOrderSteps(const ReasoningTopology& t);

nlohmann::json ToRecord(const ReasoningTopology& t);
// Throws Error(kSchemaViolation). Unknown top-level keys are kept under
// metadata["extra_fields"].
ReasoningTopology FromRecord(const nlohmann::json& record);

}  // namespace topouq
