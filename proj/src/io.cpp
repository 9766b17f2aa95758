#include "topouq/io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "topouq/error.hpp"
#include "topouq/text.hpp"

namespace topouq {

std::string ReadText(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteText(const std::filesystem::path& p, std::string_view content) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const std::filesystem::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, p);
}

std::vector<nlohmann::json> ReadJsonl(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + p.string());
  std::vector<nlohmann::json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (Trim(line).empty()) continue;
    try {
      rows.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kSchemaViolation,
                  p.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

void WriteJsonl(const std::filesystem::path& p, const std::vector<nlohmann::json>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.dump() + "\n";
  WriteText(p, out);
}

std::vector<DatasetRow> LoadDataset(const std::filesystem::path& p) {
  std::vector<DatasetRow> out;
  for (const auto& j : ReadJsonl(p)) {
    try {
      DatasetRow r;
      r.id = j.at("id").get<std::string>();
      r.question = j.at("question").get<std::string>();
      r.answer = j.value("answer", std::string());
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kSchemaViolation, std::string("dataset row: ") + e.what());
    }
  }
  return out;
}

namespace {

// gen-<k>.json -> k, or -1.
long GenerationIndex(const std::filesystem::path& p) {
  const std::string name = p.filename().string();
  if (name.rfind("gen-", 0) != 0 || p.extension() != ".json") return -1;
  const std::string digits = name.substr(4, name.size() - 4 - 5);
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) return -1;
  return std::stol(digits);
}

}  // namespace

std::vector<QueryGroup> LoadTopologies(const std::filesystem::path& p) {
  std::vector<QueryGroup> groups;
  if (std::filesystem::is_directory(p)) {
    std::vector<std::filesystem::path> dirs;
    for (const auto& e : std::filesystem::directory_iterator(p)) {
      if (e.is_directory()) dirs.push_back(e.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
      std::vector<std::pair<long, std::filesystem::path>> gens;
      for (const auto& e : std::filesystem::directory_iterator(d)) {
        const long k = GenerationIndex(e.path());
        if (k >= 0) gens.emplace_back(k, e.path());
      }
      if (gens.empty()) continue;
      std::sort(gens.begin(), gens.end());
      QueryGroup g;
      g.question_id = d.filename().string();
      for (const auto& [k, file] : gens) {
        try {
          g.topologies.push_back(FromRecord(nlohmann::json::parse(ReadText(file))));
        } catch (const nlohmann::json::exception& e) {
          throw Error(ErrorKind::kSchemaViolation, file.string() + ": " + e.what());
        }
      }
      groups.push_back(std::move(g));
    }
    return groups;
  }

  std::map<std::string, std::size_t> index;
  for (const auto& row : ReadJsonl(p)) {
    ReasoningTopology t = FromRecord(row);
    const std::string key = t.metadata.contains("question_id") &&
                                    t.metadata["question_id"].is_string()
                                ? t.metadata["question_id"].get<std::string>()
                                : t.question;
    auto [it, inserted] = index.emplace(key, groups.size());
    if (inserted) groups.push_back({key, {}});
    groups[it->second].topologies.push_back(std::move(t));
  }
  return groups;
}

}  // namespace topouq
