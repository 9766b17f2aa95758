#include "topouq/elicitation.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>
#include <regex>
#include <sstream>

#include "topouq/default_templates.hpp"
#include "topouq/parallel.hpp"
#include "topouq/text.hpp"

namespace topouq {
namespace {

std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string StripNewlines(std::string_view s) {
  while (!s.empty() && (s.front() == '\n' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

std::vector<FewShotExample> ParseFewShot(std::string_view text) {
  std::vector<FewShotExample> out;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    for (const auto& ex : j.at("examples")) {
      FewShotExample e;
      e.question = ex.at("question").get<std::string>();
      e.structure = ex.at("structure").get<std::string>();
      std::size_t i = 0;
      for (const auto& p : ex.at("pairs")) {
        e.pairs.push_back({"Edge" + std::to_string(i), "Node" + std::to_string(i),
                           p.at("sub_question").get<std::string>(),
                           p.at("sub_answer").get<std::string>()});
        ++i;
      }
      out.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchemaViolation, std::string("few-shot examples: ") + e.what());
  }
  return out;
}

std::string KnowledgeExamples(const PromptBundle& b) {
  std::string out;
  for (std::size_t i = 0; i < b.few_shot.size(); ++i) {
    const FewShotExample& ex = b.few_shot[i];
    out += "\nExample" + std::to_string(i + 1) + ":\nQuestion: " + ex.question +
           "\nExpected Response (For required knowledge):\n";
    for (std::size_t k = 0; k < ex.pairs.size(); ++k) {
      out += std::to_string(k + 1) + ". " + ex.pairs[k].sub_question + "\n";
    }
  }
  return out;
}

std::string TopologyExamples(const PromptBundle& b) {
  std::string out;
  for (std::size_t i = 0; i < b.few_shot.size(); ++i) {
    const FewShotExample& ex = b.few_shot[i];
    out += "\nExample" + std::to_string(i + 1) + ":\nQuestion: " + ex.question + "\n" +
           RenderPairs(ex.pairs) + "A Possible Output:\n" + ex.structure + "\n";
  }
  return out;
}

void CheckRenders(const PromptBundle& b) {
  try {
    RenderTemplate(b.knowledge.system, {});
    RenderTemplate(b.knowledge.user, {{"question", "q"}, {"few_shot_example", "e"}});
    RenderTemplate(b.self_answer.system, {});
    RenderTemplate(b.self_answer.user, {{"sub_question", "k"}});
    RenderTemplate(b.topology.system, {});
    RenderTemplate(b.topology.user,
                   {{"question", "q"}, {"reason_path_example", "e"}, {"q_a", "p"}});
  } catch (const Error& e) {
    throw Error(ErrorKind::kSchemaViolation, e.what());
  }
  if (b.few_shot.empty()) {
    throw Error(ErrorKind::kSchemaViolation, "prompt bundle has no few-shot examples");
  }
}

std::string Timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool IsParseError(ErrorKind k) {
  return k == ErrorKind::kMissingNodeRaw || k == ErrorKind::kMissingNodeResult ||
         k == ErrorKind::kUnresolvedId || k == ErrorKind::kMalformedTriple;
}

constexpr std::string_view kFormatReminder =
    "\n\nRespond only with numbered points, one sub-question per line, for example:\n"
    "1. <sub-question>\n2. <sub-question>";

}  // namespace

PromptTemplate ParsePromptTemplate(std::string_view text) {
  std::optional<std::size_t> sys_at, user_at;
  std::size_t pos = 0;
  std::vector<std::pair<std::size_t, std::size_t>> markers;  // (line start, content start)
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = Trim(text.substr(pos, eol - pos));
    if (line == "[system]") sys_at = markers.size(), markers.emplace_back(pos, eol + 1);
    if (line == "[user]") user_at = markers.size(), markers.emplace_back(pos, eol + 1);
    pos = eol + 1;
  }
  if (!user_at) throw Error(ErrorKind::kSchemaViolation, "template has no [user] section");
  auto section = [&](std::size_t m) {
    const std::size_t begin = std::min(markers[m].second, text.size());
    const std::size_t end = m + 1 < markers.size() ? markers[m + 1].first : text.size();
    return StripNewlines(text.substr(begin, end > begin ? end - begin : 0));
  };
  PromptTemplate t;
  if (sys_at) t.system = section(*sys_at);
  t.user = section(*user_at);
  return t;
}

PromptBundle PromptBundle::Default() {
  PromptBundle b;
  b.knowledge = ParsePromptTemplate(defaults::kKnowledgeTemplate);
  b.self_answer = ParsePromptTemplate(defaults::kSelfAnswerTemplate);
  b.topology = ParsePromptTemplate(defaults::kTopologyTemplate);
  b.few_shot = ParseFewShot(defaults::kFewShot);
  CheckRenders(b);
  return b;
}

PromptBundle PromptBundle::Load(const std::filesystem::path& dir) {
  PromptBundle b;
  b.knowledge = ParsePromptTemplate(ReadFile(dir / "knowledge.txt"));
  b.self_answer = ParsePromptTemplate(ReadFile(dir / "self_answer.txt"));
  b.topology = ParsePromptTemplate(ReadFile(dir / "topology.txt"));
  b.few_shot = ParseFewShot(ReadFile(dir / "few_shot.json"));
  CheckRenders(b);
  return b;
}

nlohmann::json PromptBundle::Hashes() const {
  auto h = [](const PromptTemplate& t) { return Sha256Hex(t.system + '\0' + t.user); };
  nlohmann::json few = nlohmann::json::array();
  for (const FewShotExample& ex : few_shot) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : ex.pairs) pairs.push_back({p.sub_question, p.sub_answer});
    few.push_back({ex.question, pairs, ex.structure});
  }
  return {{"knowledge", h(knowledge)},
          {"self_answer", h(self_answer)},
          {"topology", h(topology)},
          {"few_shot", Sha256Hex(few.dump())}};
}

std::vector<std::string> ParseNumberedPoints(std::string_view text) {
  static const std::regex kPoint(R"(^\s*(?:\*\*)?\d+[.)](?:\*\*)?\s+(.*\S)\s*$)");
  std::vector<std::string> out;
  for (std::string_view line : Split(text, '\n')) {
    const std::string s(line);
    std::smatch m;
    if (std::regex_match(s, m, kPoint)) out.push_back(m[1].str());
  }
  return out;
}

std::string RenderPairs(const std::vector<KnowledgeAnswerPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += p.tag + ": " + p.sub_question + ", " + p.node_tag + ": " + p.sub_answer + ";\n";
  }
  return out;
}

std::vector<KnowledgeAnswerPair> ReflectKnowledge(const std::string& query, ChatClient& client,
                                                  const PromptBundle& bundle,
                                                  const ElicitOptions& options) {
  ChatRequest req;
  req.system = RenderTemplate(bundle.knowledge.system, {});
  req.user = RenderTemplate(bundle.knowledge.user,
                            {{"question", query}, {"few_shot_example", KnowledgeExamples(bundle)}});
  req.temperature = options.temperature;
  req.seed = options.seed;
  req.stage = "knowledge";
  req.subject = query;

  std::vector<std::string> points = ParseNumberedPoints(client.Complete(req));
  if (points.empty()) {
    req.user += kFormatReminder;
    points = ParseNumberedPoints(client.Complete(req));
  }
  if (points.empty()) {
    throw Error(ErrorKind::kUnparseableResponse, "no numbered sub-questions in reply");
  }
  std::vector<KnowledgeAnswerPair> pairs;
  for (std::size_t i = 0; i < points.size(); ++i) {
    pairs.push_back({"Edge" + std::to_string(i), "Node" + std::to_string(i), points[i], ""});
  }
  return pairs;
}

SelfAnswerResult SelfAnswer(std::vector<KnowledgeAnswerPair> pairs, ChatClient& client,
                            const PromptBundle& bundle, const ElicitOptions& options) {
  SelfAnswerResult r;
  std::vector<std::optional<ItemFailure>> failed(pairs.size());
  ParallelFor(pairs.size(), options.workers, [&](std::size_t i) {
    ChatRequest req;
    req.system = RenderTemplate(bundle.self_answer.system, {});
    req.user = RenderTemplate(bundle.self_answer.user, {{"sub_question", pairs[i].sub_question}});
    req.temperature = options.temperature;
    req.seed = options.seed;
    req.stage = "self_answer";
    req.subject = pairs[i].sub_question;
    try {
      pairs[i].sub_answer = std::string(Trim(client.Complete(req)));
      if (pairs[i].sub_answer.empty()) {
        failed[i] = ItemFailure{i, ErrorKind::kUnparseableResponse, "empty answer"};
      }
    } catch (const Error& e) {
      failed[i] = ItemFailure{i, e.kind(), e.what()};
    }
  });
  for (auto& f : failed) {
    if (f) r.failures.push_back(std::move(*f));
  }
  r.pairs = std::move(pairs);
  return r;
}

ReasoningTopology ConstructTopology(const std::string& query,
                                    const std::vector<KnowledgeAnswerPair>& pairs,
                                    ChatClient& client, const PromptBundle& bundle,
                                    const ElicitOptions& options) {
  EdgeGlossary edges;
  NodeGlossary nodes;
  for (const auto& p : pairs) {
    edges.emplace_back(EdgeId(p.tag), p.sub_question);
    nodes.emplace_back(NodeId(p.node_tag), p.sub_answer);
  }
  ChatRequest req;
  req.system = RenderTemplate(bundle.topology.system, {});
  const std::string q_a = "\nQuestion: " + query + "\n" + RenderPairs(pairs);
  req.user = RenderTemplate(bundle.topology.user, {{"question", query},
                                                   {"reason_path_example", TopologyExamples(bundle)},
                                                   {"q_a", q_a}});
  req.temperature = options.temperature;
  req.seed = options.seed;
  req.stage = "topology";
  req.subject = query;

  std::string last_error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string reply = client.Complete(req);
    try {
      const std::string answer = ExtractResultEdgeText(reply).value_or("");
      return ParseStructureText(reply, edges, nodes, query, answer);
    } catch (const Error& e) {
      if (!IsParseError(e.kind())) throw;
      last_error = e.what();
    }
    req.user += "\n\nYour previous output could not be parsed (" + last_error +
                "). Reply with one line of the form Structure: {[NodeRaw, Node0, Edge0], ..., "
                "[Nodex, NodeResult, ResultEdge]}; ResultEdge: <conclusion>;}";
  }
  throw Error(ErrorKind::kElicitationFailed, "topology construction failed twice: " + last_error);
}

ReasoningTopology ElicitTopology(const std::string& query, ChatClient& client,
                                 const PromptBundle& bundle, const ElicitOptions& options) {
  const SelfAnswerResult answered =
      SelfAnswer(ReflectKnowledge(query, client, bundle, options), client, bundle, options);
  if (!answered.complete()) {
    const ItemFailure& f = answered.failures.front();
    throw Error(f.kind, "self-answer failed for " + answered.pairs[f.index].tag + " (" +
                            std::to_string(answered.failures.size()) + " of " +
                            std::to_string(answered.pairs.size()) + " items): " + f.message);
  }
  return ConstructTopology(query, answered.pairs, client, bundle, options);
}

GenerationSet ElicitGenerationSet(const std::string& question_id, const std::string& query,
                                  ChatClient& client, const PromptBundle& bundle,
                                  const GenerationOptions& options) {
  if (options.samples < 2) {
    throw Error(ErrorKind::kInvalidArgument, "a generation set needs L >= 2");
  }
  std::filesystem::path qdir;
  std::unique_ptr<JournaledChatClient> journal;
  if (options.run_dir) {
    qdir = *options.run_dir / question_id;
    std::filesystem::create_directories(qdir);
    journal = std::make_unique<JournaledChatClient>(client, qdir / "journal.jsonl");
  }
  ChatClient& c = journal ? static_cast<ChatClient&>(*journal) : client;
  const nlohmann::json hashes = bundle.Hashes();

  std::vector<std::optional<ReasoningTopology>> got(options.samples);
  std::vector<std::optional<GenerationFailure>> failed(options.samples);
  ParallelFor(options.samples, options.workers, [&](std::size_t k) {
    const std::filesystem::path file = qdir / ("gen-" + std::to_string(k) + ".json");
    if (journal && std::filesystem::exists(file)) {
      got[k] = FromRecord(nlohmann::json::parse(ReadFile(file)));
      return;
    }
    ElicitOptions eo;
    eo.temperature = options.temperature;
    eo.seed = static_cast<std::int64_t>(k);
    eo.workers = options.workers;
    try {
      ReasoningTopology t = ElicitTopology(query, c, bundle, eo);
      t.metadata["question_id"] = question_id;
      t.metadata["generation"] = k;
      t.metadata["model"] = client.Model();
      t.metadata["temperature"] = options.temperature;
      t.metadata["template_hashes"] = hashes;
      if (!options.reference_answer.empty()) {
        t.metadata["reference_answer"] = options.reference_answer;
      }
      t.metadata["timestamp"] = Timestamp();
      if (journal) {
        const std::filesystem::path tmp = file.string() + ".tmp";
        {
          std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
          out << ToRecord(t).dump(2) << "\n";
          if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
        }
        std::filesystem::rename(tmp, file);
      }
      got[k] = std::move(t);
    } catch (const Error& e) {
      failed[k] = GenerationFailure{static_cast<int>(k), e.kind(), e.what()};
      if (journal) {
        journal->RecordEvent({{"event", "generation_failed"},
                              {"generation", k},
                              {"kind", ErrorKindName(e.kind())},
                              {"message", e.what()}});
      }
    }
  });

  GenerationSet set;
  set.question_id = question_id;
  for (std::size_t k = 0; k < options.samples; ++k) {
    if (got[k]) set.topologies.push_back(std::move(*got[k]));
    if (failed[k]) set.failures.push_back(std::move(*failed[k]));
  }
  if (set.topologies.size() < 2) {
    const bool all_provider =
        !set.failures.empty() &&
        std::all_of(set.failures.begin(), set.failures.end(),
                    [](const GenerationFailure& f) { return IsProviderError(f.kind); });
    const std::string msg = question_id + ": only " + std::to_string(set.topologies.size()) +
                            " of " + std::to_string(options.samples) + " generations parsed" +
                            (set.failures.empty() ? "" : "; first error: " +
                                                             set.failures.front().message);
    throw Error(all_provider ? set.failures.front().kind : ErrorKind::kElicitationFailed, msg);
  }
  return set;
}

void ElicitationStats::Add(const GenerationSet& set, std::size_t samples) {
  attempted += samples;
  succeeded += set.topologies.size();
}

}  // namespace topouq
