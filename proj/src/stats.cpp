#include "topouq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "topouq/error.hpp"
#include "topouq/parallel.hpp"

namespace topouq {
namespace {

void CheckPair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::kInvalidArgument, "correlation inputs differ in length");
  }
  if (x.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "correlation needs at least 2 samples");
  }
}

bool AllEqual(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
}

bool HasTies(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return std::adjacent_find(s.begin(), s.end()) != s.end();
}

// Counts inversions while merge-sorting v[lo, hi).
std::uint64_t MergeCount(std::vector<double>& v, std::vector<double>& tmp, std::size_t lo,
                         std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = MergeCount(v, tmp, lo, mid) + MergeCount(v, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += mid - i;
      tmp[k++] = v[j++];
    } else {
      tmp[k++] = v[i++];
    }
  }
  while (i < mid) tmp[k++] = v[i++];
  while (j < hi) tmp[k++] = v[j++];
  std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo),
            tmp.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

// Sum over runs of equal values of len * (len - 1) / 2; `v` must be sorted.
template <typename It, typename Eq>
std::uint64_t TiedPairs(It begin, It end, Eq eq) {
  std::uint64_t total = 0;
  It run = begin;
  for (It it = begin; it != end; ++it) {
    if (!eq(*it, *run)) {
      const auto len = static_cast<std::uint64_t>(it - run);
      total += len * (len - 1) / 2;
      run = it;
    }
  }
  const auto len = static_cast<std::uint64_t>(end - run);
  total += len * (len - 1) / 2;
  return total;
}

MetricSummary Summarize(std::vector<double> values) {
  MetricSummary s;
  s.mean = Mean(values);
  s.std = std::sqrt(PopulationVariance(values));
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  s.percentile_2_5 = Percentile(values, 0.025);
  s.percentile_97_5 = Percentile(std::move(values), 0.975);
  return s;
}

nlohmann::json MetricToJson(const MetricSummary& m) {
  return {{"mean", m.mean},
          {"std", m.std},
          {"percentile_2_5", m.percentile_2_5},
          {"percentile_97_5", m.percentile_97_5},
          {"min", m.min},
          {"max", m.max}};
}

MetricSummary MetricFromJson(const nlohmann::json& j) {
  MetricSummary m;
  m.mean = j.at("mean").get<double>();
  m.std = j.at("std").get<double>();
  m.percentile_2_5 = j.at("percentile_2_5").get<double>();
  m.percentile_97_5 = j.at("percentile_97_5").get<double>();
  m.min = j.value("min", m.mean);
  m.max = j.value("max", m.mean);
  return m;
}

}  // namespace

double Mean(std::span<const double> v) {
  if (v.empty()) throw Error(ErrorKind::kInvalidArgument, "mean of an empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double PopulationVariance(std::span<const double> v) {
  const double m = Mean(v);
  double ss = 0.0;
  for (double a : v) ss += (a - m) * (a - m);
  return ss / static_cast<double>(v.size());
}

double Percentile(std::vector<double> v, double q) {
  if (v.empty()) throw Error(ErrorKind::kInvalidArgument, "percentile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

double Pearson(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y);
  const double mx = Mean(x);
  const double my = Mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorKind::kDegenerateInput, "zero variance in a correlation input");
  }
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

std::vector<double> AverageRanks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double Spearman(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y);
  if (AllEqual(x) || AllEqual(y)) {
    throw Error(ErrorKind::kDegenerateInput, "all-equal side in Spearman correlation");
  }
  const std::vector<double> rx = AverageRanks(x);
  const std::vector<double> ry = AverageRanks(y);
  if (HasTies(x) || HasTies(y)) return Pearson(rx, ry);
  const double n = static_cast<double>(x.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

double Kendall(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y);
  if (AllEqual(x) || AllEqual(y)) {
    throw Error(ErrorKind::kDegenerateInput, "all-equal side in Kendall correlation");
  }
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  // Pairs tied in x, and tied in both x and y.
  const std::uint64_t tied_x = TiedPairs(order.begin(), order.end(),
                                         [&](std::size_t a, std::size_t b) { return x[a] == x[b]; });
  const std::uint64_t tied_xy =
      TiedPairs(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return x[a] == x[b] && y[a] == y[b]; });

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  std::vector<double> tmp(n);
  const std::uint64_t swaps = MergeCount(ys, tmp, 0, n);  // ys ends up sorted
  const std::uint64_t tied_y =
      TiedPairs(ys.begin(), ys.end(), [](double a, double b) { return a == b; });

  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  // Pairs untied in both coordinates split into concordant and discordant;
  // the inversions are exactly the discordant ones.
  const std::uint64_t untied = total - tied_x - tied_y + tied_xy;
  const auto discordant = static_cast<std::int64_t>(swaps);
  const auto concordant = static_cast<std::int64_t>(untied) - discordant;
  return static_cast<double>(concordant - discordant) / static_cast<double>(total);
}

std::size_t IndexSampler::Next(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "cannot sample from an empty range");
  const std::uint64_t range = n;
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
  while (true) {
    const std::uint64_t draw = engine_();
    if (draw < limit) return static_cast<std::size_t>(draw % range);
  }
}

nlohmann::json EvaluationRecordToJson(const EvaluationRecord& r) {
  return {{"question_id", r.question_id},
          {"uncertainty", r.uncertainty},
          {"faithfulness", r.faithfulness},
          {"method", r.method},
          {"model", r.model}};
}

EvaluationRecord EvaluationRecordFromJson(const nlohmann::json& j) {
  try {
    EvaluationRecord r;
    r.question_id = j.at("question_id").get<std::string>();
    r.uncertainty = j.at("uncertainty").get<double>();
    r.faithfulness = j.at("faithfulness").get<double>();
    r.method = j.value("method", std::string());
    r.model = j.value("model", std::string());
    if (!std::isfinite(r.uncertainty) || !std::isfinite(r.faithfulness)) {
      throw Error(ErrorKind::kSchemaViolation, "non-finite evaluation record");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchemaViolation, std::string("evaluation record: ") + e.what());
  }
}

BootstrapSummary BootstrapEvaluate(std::span<const EvaluationRecord> records,
                                   const BootstrapOptions& options) {
  if (options.iterations == 0 || options.subset_questions < 2 ||
      options.responses_per_question == 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "bootstrap needs iterations >= 1, subset >= 2 and responses >= 1");
  }
  struct Accum {
    double u = 0.0, f = 0.0;
    std::size_t n = 0;
  };
  std::map<std::string, Accum> by_question;
  for (const EvaluationRecord& r : records) {
    Accum& a = by_question[r.question_id];
    if (a.n >= options.responses_per_question) continue;
    a.u += r.uncertainty;
    a.f += r.faithfulness;
    ++a.n;
  }
  if (by_question.size() < options.subset_questions) {
    throw Error(ErrorKind::kInsufficientData,
                std::to_string(by_question.size()) + " distinct questions, need " +
                    std::to_string(options.subset_questions));
  }
  std::vector<double> qu, qf;
  for (const auto& [id, a] : by_question) {
    qu.push_back(a.u / static_cast<double>(a.n));
    qf.push_back(a.f / static_cast<double>(a.n));
  }

  // Draw every resample up front so results do not depend on scheduling.
  IndexSampler sampler(options.seed);
  const std::size_t m = options.subset_questions;
  std::vector<std::size_t> draws(options.iterations * m);
  for (std::size_t& d : draws) d = sampler.Next(qu.size());

  struct Outcome {
    bool ok = false;
    double pcc = 0.0, src = 0.0, kendall = 0.0;
  };
  std::vector<Outcome> outcomes(options.iterations);
  ParallelFor(options.iterations, options.workers, [&](std::size_t it) {
    std::vector<double> x(m), y(m);
    for (std::size_t k = 0; k < m; ++k) {
      x[k] = qu[draws[it * m + k]];
      y[k] = qf[draws[it * m + k]];
    }
    try {
      outcomes[it] = {true, Pearson(x, y), Spearman(x, y), Kendall(x, y)};
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kDegenerateInput) throw;
    }
  });

  std::vector<double> pcc, src, kendall;
  for (const Outcome& o : outcomes) {
    if (!o.ok) continue;
    pcc.push_back(o.pcc);
    src.push_back(o.src);
    kendall.push_back(o.kendall);
  }
  if (pcc.empty()) {
    throw Error(ErrorKind::kInsufficientData, "every bootstrap resample was degenerate");
  }

  BootstrapSummary s;
  if (!records.empty()) {
    s.method = records.front().method;
    s.model = records.front().model;
  }
  s.iterations = pcc.size();
  s.skipped = options.iterations - pcc.size();
  s.questions = qu.size();
  s.pcc = Summarize(std::move(pcc));
  s.src = Summarize(std::move(src));
  s.kendall = Summarize(std::move(kendall));
  return s;
}

nlohmann::json BootstrapSummaryToJson(const BootstrapSummary& s) {
  return {{"method", s.method},
          {"model", s.model},
          {"iterations", s.iterations},
          {"skipped", s.skipped},
          {"questions", s.questions},
          {"pcc", MetricToJson(s.pcc)},
          {"src", MetricToJson(s.src)},
          {"kendall", MetricToJson(s.kendall)}};
}

BootstrapSummary BootstrapSummaryFromJson(const nlohmann::json& j) {
  try {
    BootstrapSummary s;
    s.method = j.at("method").get<std::string>();
    s.model = j.value("model", std::string());
    s.iterations = j.at("iterations").get<std::size_t>();
    s.skipped = j.value("skipped", std::size_t{0});
    s.questions = j.value("questions", std::size_t{0});
    s.pcc = MetricFromJson(j.at("pcc"));
    s.src = MetricFromJson(j.at("src"));
    s.kendall = MetricFromJson(j.at("kendall"));
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchemaViolation, std::string("bootstrap summary: ") + e.what());
  }
}

}  // namespace topouq
