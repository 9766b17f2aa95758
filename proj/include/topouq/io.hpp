#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "topouq/topology.hpp"

namespace topouq {

std::string ReadText(const std::filesystem::path& p);
// Writes via a temporary file and rename.
void WriteText(const std::filesystem::path& p, std::string_view content);

// Blank lines are skipped; a malformed line throws Error(kSchemaViolation)
// naming the line number.
std::vector<nlohmann::json> ReadJsonl(const std::filesystem::path& p);
void WriteJsonl(const std::filesystem::path& p, const std::vector<nlohmann::json>& rows);

struct DatasetRow {
  std::string id;
  std::string question;
  std::string answer;  // may be empty
};

// {"id", "question", "answer"?} per line.
std::vector<DatasetRow> LoadDataset(const std::filesystem::path& p);

struct QueryGroup {
  std::string question_id;
  std::vector<ReasoningTopology> topologies;
};

// Accepts a run directory (<dir>/<question-id>/gen-<k>.json, ascending k) or
// a JSONL file of topology records grouped by metadata.question_id (falling
// back to the question text) in order of first appearance.
std::vector<QueryGroup> LoadTopologies(const std::filesystem::path& p);

}  // namespace topouq
