#include "topouq/topology.hpp"

#include <algorithm>
#include <set>

#include "topouq/error.hpp"
#include "topouq/text.hpp"

namespace topouq {

bool IsReservedNode(const NodeId& id) {
  return id.value == kNodeRaw || id.value == kNodeResult;
}

const Node* ReasoningTopology::FindNode(const NodeId& id) const {
  auto it = std::find_if(nodes.begin(), nodes.end(),
                         [&](const Node& n) { return n.id == id; });
  return it == nodes.end() ? nullptr : &*it;
}

const Edge* ReasoningTopology::FindEdge(const EdgeId& id) const {
  auto it = std::find_if(edges.begin(), edges.end(),
                         [&](const Edge& e) { return e.id == id; });
  return it == edges.end() ? nullptr : &*it;
}

std::optional<std::size_t> ReasoningTopology::NodeIndex(const NodeId& id) const {
  const Node* n = FindNode(id);
  if (n == nullptr) return std::nullopt;
  return static_cast<std::size_t>(n - nodes.data());
}

std::optional<std::size_t> ReasoningTopology::EdgeIndex(const EdgeId& id) const {
  const Edge* e = FindEdge(id);
  if (e == nullptr) return std::nullopt;
  return static_cast<std::size_t>(e - edges.data());
}

namespace {

struct RawTriple {
  std::string from;
  std::string to;
  std::string edge;
  bool operator==(const RawTriple&) const = default;
};

struct StructureBlock {
  std::vector<RawTriple> triples;
  std::size_t end = 0;  // offset just past the closing brace
};

std::size_t FindStructureKeyword(std::string_view raw) {
  std::string lowered = AsciiLower(raw);
  return lowered.find("structure:");
}

StructureBlock ParseStructureBlock(std::string_view raw) {
  const std::size_t key = FindStructureKeyword(raw);
  if (key == std::string::npos) {
    throw Error(ErrorKind::kMalformedTriple, "no 'Structure:' block found");
  }
  std::size_t pos = key + std::string_view("structure:").size();
  while (pos < raw.size() && IsSpace(raw[pos])) ++pos;
  if (pos >= raw.size() || raw[pos] != '{') {
    throw Error(ErrorKind::kMalformedTriple,
                "'Structure:' must be followed by '{'");
  }
  ++pos;

  StructureBlock block;
  while (true) {
    while (pos < raw.size() && (IsSpace(raw[pos]) || raw[pos] == ',')) ++pos;
    if (pos >= raw.size()) {
      throw Error(ErrorKind::kMalformedTriple, "unterminated structure block");
    }
    if (raw[pos] == '}') {
      block.end = pos + 1;
      break;
    }
    if (raw[pos] != '[') {
      throw Error(ErrorKind::kMalformedTriple,
                  "unexpected character '" + std::string(1, raw[pos]) +
                      "' in structure block");
    }
    const std::size_t close = raw.find(']', pos + 1);
    if (close == std::string_view::npos) {
      throw Error(ErrorKind::kMalformedTriple, "unterminated bracket group");
    }
    const std::string_view group = raw.substr(pos + 1, close - pos - 1);
    std::vector<std::string> ids;
    for (std::string_view part : Split(group, ',')) {
      ids.emplace_back(Trim(part));
    }
    const bool all_nonempty = std::all_of(
        ids.begin(), ids.end(), [](const std::string& s) { return !s.empty(); });
    if (ids.size() != 3 || !all_nonempty) {
      throw Error(ErrorKind::kMalformedTriple,
                  "bracket group [" + std::string(group) +
                      "] does not hold exactly three ids");
    }
    RawTriple triple{ids[0], ids[1], ids[2]};
    // The model sometimes repeats a triple verbatim; keep the first.
    if (std::find(block.triples.begin(), block.triples.end(), triple) ==
        block.triples.end()) {
      block.triples.push_back(std::move(triple));
    }
    pos = close + 1;
  }
  return block;
}

std::optional<std::string> ResultEdgeClauseAfter(std::string_view raw,
                                                 std::size_t from) {
  const std::string lowered = AsciiLower(raw);
  std::size_t pos = from;
  while (true) {
    pos = lowered.find("resultedge", pos);
    if (pos == std::string::npos) return std::nullopt;
    std::size_t p = pos + std::string_view("resultedge").size();
    while (p < raw.size() && IsSpace(raw[p])) ++p;
    if (p < raw.size() && raw[p] == ':') {
      const std::size_t start = p + 1;
      std::size_t stop = raw.find(';', start);
      if (stop == std::string_view::npos) stop = raw.size();
      std::string_view text = Trim(raw.substr(start, stop - start));
      while (!text.empty() && text.back() == '}') {
        text = Trim(text.substr(0, text.size() - 1));
      }
      return std::string(text);
    }
    pos = p;
  }
}

template <typename Id>
const std::string* LookUp(const std::vector<std::pair<Id, std::string>>& glossary,
                          std::string_view id) {
  for (const auto& [key, text] : glossary) {
    if (Trim(key.value) == id) return &text;
  }
  return nullptr;
}

}  // namespace

std::optional<std::string> ExtractResultEdgeText(std::string_view raw) {
  std::size_t from = 0;
  try {
    from = ParseStructureBlock(raw).end;
  } catch (const Error&) {
    from = 0;
  }
  return ResultEdgeClauseAfter(raw, from);
}

ReasoningTopology ParseStructureText(std::string_view raw,
                                     const EdgeGlossary& edge_glossary,
                                     const NodeGlossary& node_glossary,
                                     std::string_view question,
                                     std::string_view answer) {
  const StructureBlock block = ParseStructureBlock(raw);
  const std::optional<std::string> result_edge_text =
      ResultEdgeClauseAfter(raw, block.end);

  const auto leaves_raw = std::any_of(
      block.triples.begin(), block.triples.end(),
      [](const RawTriple& t) { return t.from == kNodeRaw; });
  if (!leaves_raw) {
    throw Error(ErrorKind::kMissingNodeRaw,
                "no step leaves NodeRaw in the structure");
  }
  const auto enters_result = std::any_of(
      block.triples.begin(), block.triples.end(),
      [](const RawTriple& t) { return t.to == kNodeResult; });
  if (!enters_result) {
    throw Error(ErrorKind::kMissingNodeResult,
                "no step enters NodeResult in the structure");
  }

  std::set<std::string> used_nodes;
  std::set<std::string> used_edges;
  for (const RawTriple& t : block.triples) {
    if (t.from == t.to) {
      throw Error(ErrorKind::kMalformedTriple, "self-loop on " + t.from);
    }
    for (const std::string* id : {&t.from, &t.to}) {
      if (*id == kNodeRaw || *id == kNodeResult) continue;
      const std::string* text = LookUp(node_glossary, *id);
      if (text == nullptr || Trim(*text).empty()) {
        throw Error(ErrorKind::kUnresolvedId, "node id '" + *id + "'");
      }
      used_nodes.insert(*id);
    }
    if (t.edge != kResultEdge) {
      const std::string* text = LookUp(edge_glossary, t.edge);
      if (text == nullptr || Trim(*text).empty()) {
        throw Error(ErrorKind::kUnresolvedId, "edge id '" + t.edge + "'");
      }
    }
    used_edges.insert(t.edge);
  }

  ReasoningTopology topo;
  topo.question = std::string(question);
  topo.answer = std::string(answer);

  topo.nodes.push_back({NodeId(std::string(kNodeRaw)), topo.question});
  std::set<std::string> seen;
  for (const auto& [id, text] : node_glossary) {
    std::string key(Trim(id.value));
    if (key.empty() || key == kNodeRaw || key == kNodeResult) continue;
    if (Trim(text).empty() || !seen.insert(key).second) continue;
    topo.nodes.push_back({NodeId(key), std::string(Trim(text))});
  }
  topo.nodes.push_back({NodeId(std::string(kNodeResult)), topo.answer});

  seen.clear();
  bool has_result_edge = false;
  for (const auto& [id, text] : edge_glossary) {
    std::string key(Trim(id.value));
    if (key.empty() || !seen.insert(key).second) continue;
    if (key == kResultEdge) {
      has_result_edge = true;
      topo.edges.push_back(
          {EdgeId(key), result_edge_text.value_or(std::string(Trim(text)))});
      continue;
    }
    if (Trim(text).empty()) continue;
    topo.edges.push_back({EdgeId(key), std::string(Trim(text))});
  }
  if (!has_result_edge && (used_edges.count(std::string(kResultEdge)) > 0 ||
                           result_edge_text.has_value())) {
    topo.edges.push_back({EdgeId(std::string(kResultEdge)),
                          result_edge_text.value_or(std::string())});
  }

  for (const RawTriple& t : block.triples) {
    topo.steps.push_back({NodeId(t.from), NodeId(t.to), EdgeId(t.edge)});
  }

  const std::vector<Violation> violations = Validate(topo);
  if (!violations.empty()) {
    throw Error(ErrorKind::kMalformedTriple,
                "structure produced an invalid topology: " +
                    std::string(ViolationKindName(violations.front().kind)) +
                    " " + violations.front().id);
  }
  return topo;
}

std::string_view ViolationKindName(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kEmptyId: return "EmptyId";
    case ViolationKind::kDuplicateId: return "DuplicateId";
    case ViolationKind::kMissingNodeRaw: return "MissingNodeRaw";
    case ViolationKind::kMissingNodeResult: return "MissingNodeResult";
    case ViolationKind::kDuplicateReserved: return "DuplicateReserved";
    case ViolationKind::kSelfLoop: return "SelfLoop";
    case ViolationKind::kUnresolvedStepId: return "UnresolvedStepId";
    case ViolationKind::kNoStepFromRaw: return "NoStepFromRaw";
    case ViolationKind::kNoStepToResult: return "NoStepToResult";
    case ViolationKind::kEmptyText: return "EmptyText";
    case ViolationKind::kTextMismatch: return "TextMismatch";
  }
  return "Unknown";
}

std::vector<Violation> Validate(const ReasoningTopology& t) {
  std::vector<Violation> out;

  std::set<std::string> node_ids;
  for (const Node& n : t.nodes) {
    if (n.id.empty()) {
      out.push_back({ViolationKind::kEmptyId, ""});
      continue;
    }
    if (!node_ids.insert(n.id.value).second) {
      out.push_back({ViolationKind::kDuplicateId, n.id.value});
      continue;
    }
    if (!IsReservedNode(n.id) && n.text.empty()) {
      out.push_back({ViolationKind::kEmptyText, n.id.value});
    }
  }
  std::set<std::string> edge_ids;
  for (const Edge& e : t.edges) {
    if (e.id.empty()) {
      out.push_back({ViolationKind::kEmptyId, ""});
      continue;
    }
    if (!edge_ids.insert(e.id.value).second) {
      out.push_back({ViolationKind::kDuplicateId, e.id.value});
      continue;
    }
    if (e.id.value != kResultEdge && e.text.empty()) {
      out.push_back({ViolationKind::kEmptyText, e.id.value});
    }
  }

  const Node* raw = t.FindNode(NodeId(std::string(kNodeRaw)));
  const Node* result = t.FindNode(NodeId(std::string(kNodeResult)));
  if (raw == nullptr) {
    out.push_back({ViolationKind::kMissingNodeRaw, std::string(kNodeRaw)});
  } else if (raw->text != t.question) {
    out.push_back({ViolationKind::kTextMismatch, std::string(kNodeRaw)});
  }
  if (result == nullptr) {
    out.push_back({ViolationKind::kMissingNodeResult, std::string(kNodeResult)});
  } else if (result->text != t.answer) {
    out.push_back({ViolationKind::kTextMismatch, std::string(kNodeResult)});
  }

  bool from_raw = false;
  bool to_result = false;
  for (const Step& s : t.steps) {
    if (s.from == s.to) out.push_back({ViolationKind::kSelfLoop, s.from.value});
    if (node_ids.count(s.from.value) == 0) {
      out.push_back({ViolationKind::kUnresolvedStepId, s.from.value});
    }
    if (node_ids.count(s.to.value) == 0) {
      out.push_back({ViolationKind::kUnresolvedStepId, s.to.value});
    }
    if (edge_ids.count(s.edge.value) == 0) {
      out.push_back({ViolationKind::kUnresolvedStepId, s.edge.value});
    }
    from_raw = from_raw || s.from.value == kNodeRaw;
    to_result = to_result || s.to.value == kNodeResult;
  }
  if (raw != nullptr && !from_raw) {
    out.push_back({ViolationKind::kNoStepFromRaw, std::string(kNodeRaw)});
  }
  if (result != nullptr && !to_result) {
    out.push_back({ViolationKind::kNoStepToResult, std::string(kNodeResult)});
  }
  return out;
}

std::vector<Step> EmissionOrderSteps(const ReasoningTopology& t) {
  return t.steps;
}

nlohmann::json ToRecord(const ReasoningTopology& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const Node& n : t.nodes) {
    nodes.push_back({{"id", n.id.value}, {"text", n.text}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : t.edges) {
    edges.push_back({{"id", e.id.value}, {"text", e.text}});
  }
  nlohmann::json steps = nlohmann::json::array();
  for (const Step& s : t.steps) {
    steps.push_back(
        {{"from", s.from.value}, {"to", s.to.value}, {"edge", s.edge.value}});
  }
  return {{"question", t.question}, {"answer", t.answer}, {"nodes", nodes},
          {"edges", edges},         {"steps", steps},     {"metadata", t.metadata}};
}

namespace {

const nlohmann::json& Require(const nlohmann::json& obj, const char* key,
                              nlohmann::json::value_t type) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorKind::kSchemaViolation, std::string("missing key '") + key + "'");
  }
  if (it->type() != type) {
    throw Error(ErrorKind::kSchemaViolation,
                std::string("key '") + key + "' has the wrong type");
  }
  return *it;
}

}  // namespace

ReasoningTopology FromRecord(const nlohmann::json& record) {
  using value_t = nlohmann::json::value_t;
  if (!record.is_object()) {
    throw Error(ErrorKind::kSchemaViolation, "record is not a JSON object");
  }
  ReasoningTopology t;
  t.question = Require(record, "question", value_t::string).get<std::string>();
  t.answer = Require(record, "answer", value_t::string).get<std::string>();
  for (const auto& n : Require(record, "nodes", value_t::array)) {
    if (!n.is_object()) throw Error(ErrorKind::kSchemaViolation, "node is not an object");
    t.nodes.push_back({NodeId(Require(n, "id", value_t::string).get<std::string>()),
                       Require(n, "text", value_t::string).get<std::string>()});
  }
  for (const auto& e : Require(record, "edges", value_t::array)) {
    if (!e.is_object()) throw Error(ErrorKind::kSchemaViolation, "edge is not an object");
    t.edges.push_back({EdgeId(Require(e, "id", value_t::string).get<std::string>()),
                       Require(e, "text", value_t::string).get<std::string>()});
  }
  for (const auto& s : Require(record, "steps", value_t::array)) {
    if (!s.is_object()) throw Error(ErrorKind::kSchemaViolation, "step is not an object");
    t.steps.push_back({NodeId(Require(s, "from", value_t::string).get<std::string>()),
                       NodeId(Require(s, "to", value_t::string).get<std::string>()),
                       EdgeId(Require(s, "edge", value_t::string).get<std::string>())});
  }
  if (auto it = record.find("metadata"); it != record.end()) {
    if (!it->is_object()) {
      throw Error(ErrorKind::kSchemaViolation, "metadata is not an object");
    }
    t.metadata = *it;
  }
  static const std::set<std::string> kKnown = {"question", "answer", "nodes",
                                               "edges",    "steps",  "metadata"};
  for (const auto& [key, value] : record.items()) {
    if (kKnown.count(key) == 0) t.metadata["extra_fields"][key] = value;
  }
  return t;
}

}  // namespace topouq
