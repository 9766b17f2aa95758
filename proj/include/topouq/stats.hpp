#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace topouq {

// Throws Error(kDegenerateInput) when either side has zero variance and
// Error(kInvalidArgument) on length mismatch or n < 2.
double Pearson(std::span<const double> x, std::span<const double> y);

// 1-based ranks; tied values share the average of their positions.
std::vector<double> AverageRanks(std::span<const double> v);

// 1 - 6 sum d^2 / (n (n^2 - 1)) when neither side has ties, otherwise
// Pearson over average ranks.
double Spearman(std::span<const double> x, std::span<const double> y);

// Tau-a: (concordant - discordant) / (n (n - 1) / 2); tied pairs count as
// neither. O(n log n) via merge-sort inversion counting.
double Kendall(std::span<const double> x, std::span<const double> y);

double Mean(std::span<const double> v);
double PopulationVariance(std::span<const double> v);

// Linear interpolation between closest ranks, q in [0, 1].
double Percentile(std::vector<double> v, double q);

// Uniform indices from a std::mt19937_64 stream (a fully specified
// generator) with rejection sampling, so the sequence for a given seed is the
// same on every platform and in any language that implements MT19937-64.
class IndexSampler {
 public:
  explicit IndexSampler(std::uint64_t seed) : engine_(seed) {}
  std::size_t Next(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

struct EvaluationRecord {
  std::string question_id;
  double uncertainty = 0.0;
  double faithfulness = 0.0;
  std::string method;
  std::string model;
  bool operator==(const EvaluationRecord&) const = default;
};

nlohmann::json EvaluationRecordToJson(const EvaluationRecord& r);
EvaluationRecord EvaluationRecordFromJson(const nlohmann::json& j);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;
  double percentile_2_5 = 0.0;
  double percentile_97_5 = 0.0;
  double min = 0.0;
  double max = 0.0;
  bool operator==(const MetricSummary&) const = default;
};

struct BootstrapSummary {
  std::string method;
  std::string model;
  std::size_t iterations = 0;  // iterations that produced all three metrics
  std::size_t skipped = 0;     // resamples with a degenerate side
  std::size_t questions = 0;
  MetricSummary pcc;
  MetricSummary src;
  MetricSummary kendall;
  bool operator==(const BootstrapSummary&) const = default;
};

struct BootstrapOptions {
  std::size_t iterations = 1000;
  std::size_t subset_questions = 20;
  std::size_t responses_per_question = 10;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

// Per question: mean uncertainty and mean faithfulness over its first
// `responses_per_question` records (input order). Each iteration draws
// `subset_questions` questions with replacement and correlates the two
// means. Throws Error(kInsufficientData) with too few distinct questions or
// when every resample is degenerate.
BootstrapSummary BootstrapEvaluate(std::span<const EvaluationRecord> records,
                                   const BootstrapOptions& options);

nlohmann::json BootstrapSummaryToJson(const BootstrapSummary& s);
BootstrapSummary BootstrapSummaryFromJson(const nlohmann::json& j);

}  // namespace topouq
