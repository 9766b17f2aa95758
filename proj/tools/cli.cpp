#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <regex>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "topouq/baselines.hpp"
#include "topouq/chat.hpp"
#include "topouq/elicitation.hpp"
#include "topouq/embedding.hpp"
#include "topouq/error.hpp"
#include "topouq/faithfulness.hpp"
#include "topouq/io.hpp"
#include "topouq/reason_ged.hpp"
#include "topouq/redundancy.hpp"
#include "topouq/stats.hpp"
#include "topouq/synthetic.hpp"

namespace topouq {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Method names used in uq output, evaluation records and reports.
constexpr const char* kTopoUq = "topo-uq";
constexpr const char* kCota = "cota";
constexpr const char* kEmbedUq = "embed-uq";
constexpr const char* kEntailUq = "entail-uq";
constexpr const char* kNliLogitUq = "nli-logit-uq";

struct RunConfig {
  std::string endpoint = "mock";
  std::string model = "synthetic-mock";
  std::string embed_provider = "hash:0";
  std::string embed_endpoint;
  std::string embed_model = "text-embedding-3-small";
  std::string cache;
  std::size_t workers = 1;
  bool json_errors = false;
};

HttpOptions HttpFor(const RunConfig& c) {
  HttpOptions o;
  o.max_in_flight = static_cast<std::ptrdiff_t>(std::max<std::size_t>(c.workers, 1));
  return o;
}

std::unique_ptr<ChatClient> MakeChat(const RunConfig& c) {
  if (c.endpoint == "mock") return std::make_unique<SyntheticChatClient>(c.model);
  return std::make_unique<OpenAIChatClient>(c.endpoint, c.model, ApiKeyFromEnv(), HttpFor(c));
}

std::unique_ptr<EmbeddingProvider> MakeEmbedder(const RunConfig& c) {
  static const std::regex kHash(R"(hash:(\d+))");
  std::smatch m;
  if (std::regex_match(c.embed_provider, m, kHash)) {
    return std::make_unique<HashingProvider>(std::stoull(m[1].str()));
  }
  if (c.embed_provider == "remote") {
    const std::string url = c.embed_endpoint.empty() ? c.endpoint : c.embed_endpoint;
    if (url == "mock") {
      throw Error(ErrorKind::kInvalidArgument,
                  "--embed-provider remote needs --embed-endpoint or a remote --endpoint");
    }
    return std::make_unique<OpenAIEmbeddingProvider>(url, c.embed_model, ApiKeyFromEnv(),
                                                     HttpFor(c));
  }
  throw Error(ErrorKind::kInvalidArgument,
              "--embed-provider must be hash:<seed> or remote, got '" + c.embed_provider + "'");
}

std::unique_ptr<EmbeddingCache> MakeCache(const RunConfig& c) {
  if (c.cache.empty()) return std::make_unique<EmbeddingCache>();
  return std::make_unique<EmbeddingCache>(fs::path(c.cache));
}

EmbedOptions EmbedFor(const RunConfig& c) {
  EmbedOptions o;
  o.max_in_flight = std::max<std::size_t>(c.workers, 1);
  return o;
}

void WriteJson(const fs::path& p, const json& j) { WriteText(p, j.dump(2) + "\n"); }

std::string GenerationId(const ReasoningTopology& t, std::size_t fallback) {
  if (t.metadata.contains("generation")) return "gen-" + t.metadata["generation"].dump();
  return "gen-" + std::to_string(fallback);
}

std::string ModelOf(const std::vector<QueryGroup>& groups, const std::string& fallback) {
  for (const auto& g : groups) {
    for (const auto& t : g.topologies) {
      if (t.metadata.contains("model") && t.metadata["model"].is_string()) {
        return t.metadata["model"].get<std::string>();
      }
    }
  }
  return fallback;
}

std::vector<EmbeddedTopology> EmbedGroup(const QueryGroup& g, EmbeddingProvider& p,
                                         EmbeddingCache& cache, const EmbedOptions& o) {
  std::vector<EmbeddedTopology> out;
  for (const auto& t : g.topologies) out.push_back(EmbedTopology(t, p, cache, o));
  return out;
}

std::string Fixed(double v, int digits) {
  if (v == 0.0) v = 0.0;  // no "-0.000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---- elicit ---------------------------------------------------------------

struct ElicitArgs {
  std::string dataset;
  std::size_t synthetic = 0;
  std::uint64_t synthetic_seed = 0;
  std::size_t samples = 10;
  double temperature = 1.0;
  std::string templates;
  std::string out;
};

int RunElicit(const RunConfig& c, const ElicitArgs& a, std::ostream& out) {
  if (a.dataset.empty() == (a.synthetic == 0)) {
    throw Error(ErrorKind::kInvalidArgument, "give exactly one of --dataset or --synthetic");
  }
  std::vector<DatasetRow> rows;
  if (a.synthetic > 0) {
    for (auto& q : SyntheticDataset(a.synthetic, a.synthetic_seed)) {
      rows.push_back({q.id, q.question, q.answer});
    }
  } else {
    rows = LoadDataset(a.dataset);
  }
  const PromptBundle bundle =
      a.templates.empty() ? PromptBundle::Default() : PromptBundle::Load(a.templates);
  std::unique_ptr<ChatClient> chat = MakeChat(c);

  fs::create_directories(a.out);
  if (a.synthetic > 0) {
    std::vector<json> lines;
    for (const auto& r : rows) lines.push_back({{"id", r.id}, {"question", r.question}, {"answer", r.answer}});
    WriteJsonl(fs::path(a.out) / "dataset.jsonl", lines);
  }

  ElicitationStats stats;
  json partial = json::array();
  json failed = json::array();
  for (const auto& r : rows) {
    GenerationOptions go;
    go.samples = a.samples;
    go.temperature = a.temperature;
    go.workers = c.workers;
    go.reference_answer = r.answer;
    go.run_dir = fs::path(a.out);
    try {
      const GenerationSet set = ElicitGenerationSet(r.id, r.question, *chat, bundle, go);
      stats.Add(set, a.samples);
      if (set.partial()) partial.push_back({{"id", r.id}, {"failures", set.failures.size()}});
    } catch (const Error& e) {
      if (IsProviderError(e.kind())) throw;
      stats.attempted += a.samples;
      failed.push_back({{"id", r.id}, {"kind", ErrorKindName(e.kind())}, {"message", e.what()}});
    }
  }
  const json summary = {{"model", chat->Model()},
                        {"queries", rows.size()},
                        {"samples", a.samples},
                        {"temperature", a.temperature},
                        {"attempted", stats.attempted},
                        {"succeeded", stats.succeeded},
                        {"success_rate", stats.rate()},
                        {"partial", partial},
                        {"failed", failed}};
  WriteJson(fs::path(a.out) / "elicitation.json", summary);
  out << summary.dump() << "\n";
  return failed.size() == rows.size() && !rows.empty() ? 2 : 0;
}

// ---- embed ----------------------------------------------------------------

int RunEmbed(const RunConfig& c, const std::string& in, const std::string& out_path,
             std::ostream& out) {
  const std::vector<QueryGroup> groups = LoadTopologies(in);
  auto provider = MakeEmbedder(c);
  auto cache = MakeCache(c);
  std::vector<json> rows;
  for (const auto& g : groups) {
    for (const auto& e : EmbedGroup(g, *provider, *cache, EmbedFor(c))) {
      json nodes = json::object();
      json edges = json::object();
      for (std::size_t i = 0; i < e.topology.nodes.size(); ++i) {
        nodes[e.topology.nodes[i].id.value] = std::vector<double>(
            e.node_vectors[i].data(), e.node_vectors[i].data() + e.node_vectors[i].size());
      }
      for (std::size_t i = 0; i < e.topology.edges.size(); ++i) {
        edges[e.topology.edges[i].id.value] = std::vector<double>(
            e.edge_vectors[i].data(), e.edge_vectors[i].data() + e.edge_vectors[i].size());
      }
      rows.push_back({{"question_id", g.question_id},
                      {"generation", e.topology.metadata.value("generation", json())},
                      {"provider", e.provider_id},
                      {"zero_vector_ids", e.zero_vector_ids},
                      {"nodes", nodes},
                      {"edges", edges}});
    }
  }
  if (!out_path.empty()) WriteJsonl(out_path, rows);
  out << json{{"provider", provider->Id()}, {"topologies", rows.size()},
              {"cached_texts", cache->size()}}
             .dump()
      << "\n";
  return 0;
}

// ---- ged / uq -------------------------------------------------------------

int RunGed(const RunConfig& c, const std::string& in, const std::string& out_path,
           std::ostream& out) {
  const std::vector<QueryGroup> groups = LoadTopologies(in);
  auto provider = MakeEmbedder(c);
  auto cache = MakeCache(c);
  std::vector<json> rows;
  for (const auto& g : groups) {
    const auto embedded = EmbedGroup(g, *provider, *cache, EmbedFor(c));
    DistanceMatrix d = ComputeDistanceMatrix(embedded, {c.workers, nullptr});
    json j = DistanceMatrixToJson(d);
    j["question_id"] = g.question_id;
    rows.push_back(std::move(j));
  }
  WriteJsonl(out_path, rows);
  out << json{{"queries", rows.size()}, {"out", out_path}}.dump() << "\n";
  return 0;
}

struct UqArgs {
  std::string in;
  std::string out;
  bool baselines = true;
  std::string scorer = "lexical";
  double cota_threshold = kCotaThreshold;
};

std::unique_ptr<EntailmentScorer> MakeScorer(const std::string& name, ChatClient* chat) {
  if (name == "lexical") return std::make_unique<LexicalOverlapScorer>();
  if (name == "chat") return std::make_unique<ChatEntailmentScorer>(*chat);
  throw Error(ErrorKind::kInvalidArgument, "--scorer must be lexical or chat");
}

int RunUq(const RunConfig& c, const UqArgs& a, std::ostream& out) {
  const std::vector<QueryGroup> groups = LoadTopologies(a.in);
  auto provider = MakeEmbedder(c);
  auto cache = MakeCache(c);
  std::unique_ptr<ChatClient> chat;
  if (a.baselines && a.scorer == "chat") chat = MakeChat(c);
  auto scorer = MakeScorer(a.scorer, chat.get());
  BaselineOptions bo;
  bo.cota_threshold = a.cota_threshold;
  bo.workers = c.workers;

  json queries = json::array();
  json skipped = json::array();
  for (const auto& g : groups) {
    if (g.topologies.size() < 2) {
      skipped.push_back({{"question_id", g.question_id},
                         {"reason", ErrorKindName(ErrorKind::kTooFewGenerations)}});
      continue;
    }
    const auto embedded = EmbedGroup(g, *provider, *cache, EmbedFor(c));
    const DistanceMatrix d = ComputeDistanceMatrix(embedded, {c.workers, nullptr});
    json scores = {{kTopoUq, StructuralUncertainty(d)}};
    if (a.baselines) {
      std::vector<Explanation> exps;
      for (const auto& t : g.topologies) exps.push_back(ExplanationFromTopology(t));
      scores[kCota] = CotaUncertainty(exps, *scorer, bo);
      scores[kEmbedUq] = EmbedUncertainty(exps, *provider, *cache, EmbedFor(c));
      scores[kEntailUq] = EntailUncertainty(exps, *scorer, bo);
      scores[kNliLogitUq] = NliLogitUncertainty(exps, *scorer, bo);
    }
    double node_rate = 0.0, edge_rate = 0.0;
    for (const auto& t : g.topologies) {
      const RedundancyReport r = ComputeRedundancy(t);
      node_rate += r.node_rate;
      edge_rate += r.edge_rate;
    }
    const double n = static_cast<double>(g.topologies.size());
    queries.push_back({{"question_id", g.question_id},
                       {"query", g.topologies.front().question},
                       {"generation_ids", d.generation_ids},
                       {"scores", scores},
                       {"redundancy", {{"node_rate_mean", node_rate / n},
                                       {"edge_rate_mean", edge_rate / n}}}});
  }
  const json report = {{"model", ModelOf(groups, c.model)},
                       {"provider", provider->Id()},
                       {"scorer", a.baselines ? a.scorer : "none"},
                       {"queries", queries},
                       {"skipped", skipped}};
  WriteJson(a.out, report);
  out << json{{"queries", queries.size()}, {"skipped", skipped.size()}, {"out", a.out}}.dump()
      << "\n";
  return queries.empty() ? 2 : 0;
}

// ---- redundancy -----------------------------------------------------------

int RunRedundancy(const std::string& in, const std::string& out_path, std::size_t max_paths,
                  std::ostream& out) {
  const std::vector<QueryGroup> groups = LoadTopologies(in);
  std::vector<json> rows;
  double node_sum = 0.0, edge_sum = 0.0;
  for (const auto& g : groups) {
    for (std::size_t k = 0; k < g.topologies.size(); ++k) {
      const RedundancyReport r = ComputeRedundancy(g.topologies[k], max_paths);
      json j = RedundancyToJson(r);
      j["question_id"] = g.question_id;
      j["generation_id"] = GenerationId(g.topologies[k], k);
      node_sum += r.node_rate;
      edge_sum += r.edge_rate;
      rows.push_back(std::move(j));
    }
  }
  WriteJsonl(out_path, rows);
  const double n = rows.empty() ? 1.0 : static_cast<double>(rows.size());
  out << json{{"topologies", rows.size()},
              {"node_rate_mean", node_sum / n},
              {"edge_rate_mean", edge_sum / n}}
             .dump()
      << "\n";
  return 0;
}

// ---- faithfulness ---------------------------------------------------------

int RunFaithfulness(const RunConfig& c, const std::string& in, const std::string& mode_name,
                    const std::string& out_path, std::string journal_path, std::ostream& out) {
  const MatchMode mode = ParseMatchMode(mode_name);
  const std::vector<QueryGroup> groups = LoadTopologies(in);
  std::unique_ptr<ChatClient> inner = MakeChat(c);
  if (journal_path.empty()) journal_path = out_path + ".journal.jsonl";
  if (fs::path(journal_path).has_parent_path()) {
    fs::create_directories(fs::path(journal_path).parent_path());
  }
  JournaledChatClient chat(*inner, journal_path);
  std::vector<json> rows;
  double sum = 0.0;
  for (const auto& g : groups) {
    for (const auto& t : g.topologies) {
      FaithfulnessRecord r = EarlyAnswerFaithfulness(t, chat, mode, {c.workers});
      if (r.question_id.empty()) r.question_id = g.question_id;
      json j = FaithfulnessToJson(r);
      j["model"] = t.metadata.value("model", inner->Model());
      j["mode"] = MatchModeName(mode);
      sum += r.v_faith;
      rows.push_back(std::move(j));
    }
  }
  WriteJsonl(out_path, rows);
  out << json{{"records", rows.size()},
              {"v_faith_mean", rows.empty() ? 0.0 : sum / static_cast<double>(rows.size())},
              {"replayed", chat.replayed()},
              {"forwarded", chat.forwarded()}}
             .dump()
      << "\n";
  return 0;
}

// ---- baselines ------------------------------------------------------------

int RunBaselines(const RunConfig& c, const std::string& method, const std::string& in,
                 const std::string& out_path, const std::string& scorer_name,
                 double threshold, std::ostream& out) {
  std::vector<std::pair<std::string, std::vector<Explanation>>> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& row : ReadJsonl(in)) {
    Explanation e = ExplanationFromJson(row);
    auto [it, inserted] = index.emplace(e.query, groups.size());
    if (inserted) groups.push_back({e.query, {}});
    groups[it->second].second.push_back(std::move(e));
  }
  std::unique_ptr<ChatClient> chat;
  std::unique_ptr<EmbeddingProvider> provider;
  std::unique_ptr<EmbeddingCache> cache;
  if (method == "embed") {
    provider = MakeEmbedder(c);
    cache = MakeCache(c);
  } else if (method != "cota" && method != "entail" && method != "nli-logit") {
    throw Error(ErrorKind::kInvalidArgument, "--method must be cota, embed, entail or nli-logit");
  } else if (scorer_name == "chat") {
    chat = MakeChat(c);
  }
  auto scorer = MakeScorer(scorer_name, chat.get());
  BaselineOptions bo;
  bo.cota_threshold = threshold;
  bo.workers = c.workers;

  json scores = json::array();
  for (const auto& [query, exps] : groups) {
    double s = 0.0;
    if (method == "cota") s = CotaUncertainty(exps, *scorer, bo);
    if (method == "embed") s = EmbedUncertainty(exps, *provider, *cache, EmbedFor(c));
    if (method == "entail") s = EntailUncertainty(exps, *scorer, bo);
    if (method == "nli-logit") s = NliLogitUncertainty(exps, *scorer, bo);
    scores.push_back({{"query", query}, {"explanations", exps.size()}, {"score", s}});
  }
  WriteJson(out_path, {{"method", method}, {"scores", scores}});
  out << json{{"method", method}, {"queries", scores.size()}}.dump() << "\n";
  return 0;
}

// ---- evaluate -------------------------------------------------------------

struct EvaluateArgs {
  std::string records;
  std::string uq;
  std::string faithfulness;
  std::string records_out;
  std::size_t iterations = 1000;
  std::string subset = "20x10";
  std::optional<std::uint64_t> seed;
  std::string out;
};

std::pair<std::size_t, std::size_t> ParseSubset(const std::string& s) {
  static const std::regex kSubset(R"((\d+)x(\d+))");
  std::smatch m;
  if (!std::regex_match(s, m, kSubset)) {
    throw Error(ErrorKind::kInvalidArgument, "--subset must look like 20x10");
  }
  return {std::stoul(m[1].str()), std::stoul(m[2].str())};
}

std::vector<EvaluationRecord> JoinRecords(const std::string& uq_path,
                                          const std::string& faith_path) {
  const json uq = json::parse(ReadText(uq_path));
  std::map<std::string, json> scores;
  const std::string model = uq.value("model", std::string());
  for (const auto& q : uq.at("queries")) {
    scores[q.at("question_id").get<std::string>()] = q.at("scores");
  }
  std::vector<EvaluationRecord> out;
  for (const auto& row : ReadJsonl(faith_path)) {
    const FaithfulnessRecord f = FaithfulnessFromJson(row);
    auto it = scores.find(f.question_id);
    if (it == scores.end()) continue;
    for (const auto& [method, value] : it->second.items()) {
      out.push_back({f.question_id, value.get<double>(), f.v_faith, method,
                     row.value("model", model)});
    }
  }
  return out;
}

int RunEvaluate(const RunConfig& c, const EvaluateArgs& a, std::ostream& out) {
  if (!a.seed) throw Error(ErrorKind::kInvalidArgument, "evaluate needs --seed");
  std::vector<EvaluationRecord> records;
  if (!a.records.empty()) {
    for (const auto& row : ReadJsonl(a.records)) records.push_back(EvaluationRecordFromJson(row));
  } else if (!a.uq.empty() && !a.faithfulness.empty()) {
    records = JoinRecords(a.uq, a.faithfulness);
  } else {
    throw Error(ErrorKind::kInvalidArgument, "give --records, or both --uq and --faithfulness");
  }
  if (!a.records_out.empty()) {
    std::vector<json> rows;
    for (const auto& r : records) rows.push_back(EvaluationRecordToJson(r));
    WriteJsonl(a.records_out, rows);
  }

  // One bootstrap per (model, method), in order of first appearance.
  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::vector<EvaluationRecord>> by_key;
  for (const auto& r : records) {
    auto key = std::make_pair(r.model, r.method);
    if (!by_key.count(key)) keys.push_back(key);
    by_key[key].push_back(r);
  }
  if (keys.empty()) throw Error(ErrorKind::kInsufficientData, "no evaluation records");
  const auto [subset, responses] = ParseSubset(a.subset);
  BootstrapOptions bo;
  bo.iterations = a.iterations;
  bo.subset_questions = subset;
  bo.responses_per_question = responses;
  bo.seed = *a.seed;
  bo.workers = c.workers;
  json summaries = json::array();
  json failed = json::array();
  for (const auto& key : keys) {
    try {
      BootstrapSummary s = BootstrapEvaluate(by_key[key], bo);
      s.model = key.first;
      s.method = key.second;
      summaries.push_back(BootstrapSummaryToJson(s));
    } catch (const Error& e) {
      // A method that is constant on this data has no correlation; report it
      // and keep the others.
      if (e.kind() != ErrorKind::kInsufficientData) throw;
      failed.push_back({{"model", key.first}, {"method", key.second}, {"message", e.what()}});
    }
  }
  const json result = {{"seed", *a.seed},       {"iterations", a.iterations},
                       {"subset", a.subset},    {"summaries", summaries},
                       {"failed", failed}};
  WriteJson(a.out, result);
  out << json{{"summaries", summaries.size()}, {"failed", failed}, {"out", a.out}}.dump() << "\n";
  return summaries.empty() ? 2 : 0;
}

// ---- report ---------------------------------------------------------------

int RunReport(const std::vector<std::string>& inputs, const std::string& csv_path,
              const std::string& text_path, std::ostream& out) {
  std::vector<BootstrapSummary> all;
  for (const auto& p : inputs) {
    const json j = json::parse(ReadText(p));
    const json& list = j.contains("summaries") ? j.at("summaries") : j;
    if (list.is_array()) {
      for (const auto& s : list) all.push_back(BootstrapSummaryFromJson(s));
    } else {
      all.push_back(BootstrapSummaryFromJson(list));
    }
  }
  if (all.empty()) throw Error(ErrorKind::kInsufficientData, "no summaries to report");

  std::string csv =
      "model,method,pcc_mean,pcc_std,src_mean,src_std,kendall_mean,kendall_std,iterations\n";
  for (const auto& s : all) {
    csv += s.model + "," + s.method + "," + Fixed(s.pcc.mean, 6) + "," + Fixed(s.pcc.std, 6) +
           "," + Fixed(s.src.mean, 6) + "," + Fixed(s.src.std, 6) + "," +
           Fixed(s.kendall.mean, 6) + "," + Fixed(s.kendall.std, 6) + "," +
           std::to_string(s.iterations) + "\n";
  }

  std::vector<std::string> models;
  for (const auto& s : all) {
    if (std::find(models.begin(), models.end(), s.model) == models.end()) models.push_back(s.model);
  }
  std::ostringstream text;
  char line[160];
  for (const auto& m : models) {
    text << "Model: " << (m.empty() ? "(unnamed)" : m) << "\n";
    std::snprintf(line, sizeof line, "%-14s %18s %18s %18s\n", "Method", "PCC", "SRC", "Kendall");
    text << line;
    for (const auto& s : all) {
      if (s.model != m) continue;
      auto cell = [](const MetricSummary& x) { return Fixed(x.mean, 3) + " +/- " + Fixed(x.std, 3); };
      std::snprintf(line, sizeof line, "%-14s %18s %18s %18s\n", s.method.c_str(),
                    cell(s.pcc).c_str(), cell(s.src).c_str(), cell(s.kendall).c_str());
      text << line;
    }
    text << "\n";
  }
  if (!csv_path.empty()) WriteText(csv_path, csv);
  if (!text_path.empty()) WriteText(text_path, text.str());
  out << text.str();
  return 0;
}

int ExitCodeFor(ErrorKind kind) {
  if (IsProviderError(kind)) return 3;
  if (kind == ErrorKind::kInvalidArgument) return 1;
  return 2;
}

void ReportError(std::ostream& err, bool as_json, std::string_view kind, const std::string& msg,
                 int code) {
  if (as_json) {
    err << json{{"error", kind}, {"message", msg}, {"exit_code", code}}.dump() << "\n";
  } else {
    err << "topo-uq: " << msg << "\n";
  }
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reasoning-topology uncertainty quantification", "topo-uq"};
  app.set_config("--config", "", "TOML/INI config file; flags override it");
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  app.add_flag("--json", cfg.json_errors, "Print errors as JSON on stderr");
  app.add_option("--endpoint", cfg.endpoint,
                 "Chat endpoint base URL, or 'mock' for the offline synthetic model")
      ->capture_default_str();
  app.add_option("--model", cfg.model, "Chat model name")->capture_default_str();
  app.add_option("--embed-provider", cfg.embed_provider, "hash:<seed> or remote")
      ->capture_default_str();
  app.add_option("--embed-endpoint", cfg.embed_endpoint,
                 "Embedding endpoint base URL (defaults to --endpoint)");
  app.add_option("--embed-model", cfg.embed_model, "Remote embedding model")
      ->capture_default_str();
  app.add_option("--cache,--embed-cache", cfg.cache, "Embedding cache file (JSONL)");
  app.add_option("--workers", cfg.workers, "Concurrent workers / in-flight requests")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  ElicitArgs elicit;
  auto* c_elicit = app.add_subcommand("elicit", "Elicit L reasoning topologies per question");
  c_elicit->add_option("--dataset", elicit.dataset, "Questions JSONL {id, question, answer?}");
  c_elicit->add_option("--synthetic", elicit.synthetic, "Generate N synthetic questions instead");
  c_elicit->add_option("--synthetic-seed", elicit.synthetic_seed, "Seed for --synthetic");
  c_elicit->add_option("--samples,-L", elicit.samples, "Generations per question")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();
  c_elicit->add_option("--temperature", elicit.temperature)->capture_default_str();
  c_elicit->add_option("--templates", elicit.templates, "Template directory (default: bundled v1)");
  c_elicit->add_option("--out", elicit.out, "Run directory")->required();

  std::string embed_in, embed_out;
  auto* c_embed = app.add_subcommand("embed", "Embed node and edge texts, filling the cache");
  c_embed->add_option("--in", embed_in, "Run directory or topology JSONL")->required();
  c_embed->add_option("--out", embed_out, "Embedded topologies JSONL");

  std::string ged_in, ged_out;
  auto* c_ged = app.add_subcommand("ged", "Pairwise Reason-GED distance matrix per question");
  c_ged->add_option("--in", ged_in, "Run directory or topology JSONL")->required();
  c_ged->add_option("--out", ged_out, "Distance matrices JSONL")->required();

  UqArgs uq;
  auto* c_uq = app.add_subcommand("uq", "Structural uncertainty, baselines and redundancy");
  c_uq->add_option("--in", uq.in, "Run directory or topology JSONL")->required();
  c_uq->add_option("--out", uq.out, "Uncertainty report JSON")->required();
  c_uq->add_flag("!--no-baselines", uq.baselines, "Skip the comparison methods");
  c_uq->add_option("--scorer", uq.scorer, "Entailment scorer: lexical or chat")
      ->capture_default_str();
  c_uq->add_option("--cota-threshold", uq.cota_threshold)->capture_default_str();

  std::string red_in, red_out;
  std::size_t max_paths = kDefaultMaxPaths;
  auto* c_red = app.add_subcommand("redundancy", "Valid paths and redundancy rates");
  c_red->add_option("--in", red_in, "Run directory or topology JSONL")->required();
  c_red->add_option("--out", red_out, "Redundancy JSONL")->required();
  c_red->add_option("--max-paths", max_paths)->capture_default_str();

  std::string faith_in, faith_out, faith_mode = "numeric", faith_journal;
  auto* c_faith = app.add_subcommand("faithfulness", "Early-answering faithfulness per topology");
  c_faith->add_option("--in", faith_in, "Run directory or topology JSONL")->required();
  c_faith->add_option("--mode", faith_mode, "exact or numeric")->capture_default_str();
  c_faith->add_option("--out", faith_out, "Faithfulness JSONL")->required();
  c_faith->add_option("--journal", faith_journal, "Probe journal (default: <out>.journal.jsonl)");

  std::string bl_method, bl_in, bl_out, bl_scorer = "lexical";
  double bl_threshold = kCotaThreshold;
  auto* c_bl = app.add_subcommand("baselines", "One comparison method over explanation texts");
  c_bl->add_option("--method", bl_method, "cota, embed, entail or nli-logit")->required();
  c_bl->add_option("--in", bl_in, "Explanations JSONL {id?, query, steps, answer?}")->required();
  c_bl->add_option("--out", bl_out, "Scores JSON")->required();
  c_bl->add_option("--scorer", bl_scorer, "lexical or chat")->capture_default_str();
  c_bl->add_option("--cota-threshold", bl_threshold)->capture_default_str();

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "Bootstrap correlation of uncertainty vs faithfulness");
  c_ev->add_option("--records", ev.records, "EvaluationRecord JSONL");
  c_ev->add_option("--uq", ev.uq, "uq report to join with --faithfulness");
  c_ev->add_option("--faithfulness", ev.faithfulness, "Faithfulness JSONL");
  c_ev->add_option("--records-out", ev.records_out, "Write the joined records here");
  c_ev->add_option("--iterations", ev.iterations)->check(CLI::PositiveNumber)->capture_default_str();
  c_ev->add_option("--subset", ev.subset, "<questions>x<responses>")->capture_default_str();
  c_ev->add_option("--seed", ev.seed, "Bootstrap seed (required)");
  c_ev->add_option("--out", ev.out, "Summary JSON")->required();

  std::vector<std::string> rep_in;
  std::string rep_csv, rep_text;
  auto* c_rep = app.add_subcommand("report", "Method x metric table per model");
  c_rep->add_option("--in", rep_in, "Summary JSON from evaluate (repeatable)")->required();
  c_rep->add_option("--csv", rep_csv, "CSV output");
  c_rep->add_option("--text", rep_text, "Formatted table output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    return 0;
  } catch (const CLI::ParseError& e) {
    // Subcommand --help arrives here as a ParseError subtype too.
    if (e.get_exit_code() == 0) {
      std::ostringstream o, er;
      app.exit(e, o, er);
      out << o.str() << er.str();
      return 0;
    }
    ReportError(err, cfg.json_errors, "UsageError", std::string("UsageError: ") + e.what(), 1);
    return 1;
  }

  try {
    if (c_elicit->parsed()) return RunElicit(cfg, elicit, out);
    if (c_embed->parsed()) return RunEmbed(cfg, embed_in, embed_out, out);
    if (c_ged->parsed()) return RunGed(cfg, ged_in, ged_out, out);
    if (c_uq->parsed()) return RunUq(cfg, uq, out);
    if (c_red->parsed()) return RunRedundancy(red_in, red_out, max_paths, out);
    if (c_faith->parsed()) {
      return RunFaithfulness(cfg, faith_in, faith_mode, faith_out, faith_journal, out);
    }
    if (c_bl->parsed()) {
      return RunBaselines(cfg, bl_method, bl_in, bl_out, bl_scorer, bl_threshold, out);
    }
    if (c_ev->parsed()) return RunEvaluate(cfg, ev, out);
    if (c_rep->parsed()) return RunReport(rep_in, rep_csv, rep_text, out);
  } catch (const Error& e) {
    const int code = ExitCodeFor(e.kind());
    ReportError(err, cfg.json_errors, ErrorKindName(e.kind()), e.what(), code);
    return code;
  } catch (const nlohmann::json::exception& e) {
    ReportError(err, cfg.json_errors, "SchemaViolation",
                std::string("SchemaViolation: ") + e.what(), 2);
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    ReportError(err, cfg.json_errors, "Io", std::string("Io: ") + e.what(), 2);
    return 2;
  }
  return 1;
}

}  // namespace topouq
