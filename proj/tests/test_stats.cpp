#include <doctest.h>

#include <random>

#include "testing.hpp"
#include "topouq/error.hpp"
#include "topouq/stats.hpp"

using namespace topouq;
using namespace topouq::testing;

namespace {

using Vec = std::vector<double>;

std::vector<EvaluationRecord> Records(std::size_t questions, std::size_t per, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-0.02, 0.02);
  std::vector<EvaluationRecord> out;
  for (std::size_t q = 0; q < questions; ++q) {
    const double d = static_cast<double>(q) / static_cast<double>(questions);
    for (std::size_t r = 0; r < per; ++r) {
      out.push_back({"q" + std::to_string(q), d + noise(rng), 1.0 - d + noise(rng), "m", "x"});
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("fixtures") {
  CHECK(Pearson(Vec{1, 2, 3}, Vec{1, 2, 4}) == doctest::Approx(0.981981).epsilon(1e-5));
  CHECK(Spearman(Vec{1, 2, 3}, Vec{1, 3, 2}) == doctest::Approx(0.5));
  CHECK(Kendall(Vec{1, 2, 3}, Vec{1, 3, 2}) == doctest::Approx(1.0 / 3.0));
  CHECK(Kendall(Vec{1, 2, 3}, Vec{3, 2, 1}) == -1.0);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(Pearson(Vec{1, 1, 1}, Vec{1, 2, 3}), Error);
  CHECK_THROWS_AS(Pearson(Vec{1, 2}, Vec{1, 2, 3}), Error);
  CHECK_THROWS_AS(Kendall(Vec{1}, Vec{1}), Error);
}

TEST_CASE("ties") {
  CHECK(AverageRanks(Vec{10, 20, 10, 30}) == Vec{1.5, 3, 1.5, 4});
  const Vec x = {1, 2, 2, 3}, y = {1, 3, 2, 4};
  CHECK(Spearman(x, y) == doctest::Approx(Pearson(AverageRanks(x), AverageRanks(y))));
  CHECK(Kendall(x, y) == BruteKendall(x, y));
}

TEST_CASE("rank statistics ignore monotone maps, pearson ignores affine maps") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    Vec x(30), y(30), mx(30), ax(30);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = g(rng);
      y[i] = x[i] + g(rng);
      mx[i] = std::exp(x[i]);
      ax[i] = 3.0 * x[i] - 7.0;
    }
    CHECK(Spearman(mx, y) == doctest::Approx(Spearman(x, y)));
    CHECK(Kendall(mx, y) == Kendall(x, y));
    CHECK(Pearson(ax, y) == doctest::Approx(Pearson(x, y)));
  }
}

TEST_CASE("kendall matches brute force") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = Uniform(rng, 2, 200);
    Vec x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng() % 20);
      y[i] = static_cast<double>(rng() % 20);
    }
    CHECK(Kendall(x, y) == BruteKendall(x, y));
  }
}

TEST_CASE("moments and percentiles") {
  CHECK(Mean(Vec{1, 2, 3}) == 2.0);
  CHECK(PopulationVariance(Vec{0, 1, 2}) == doctest::Approx(2.0 / 3.0));
  CHECK(Percentile(Vec{4, 1, 3, 2}, 0.5) == 2.5);
  CHECK(Percentile(Vec{1, 2, 3, 4, 5}, 0.025) == doctest::Approx(1.1));
  CHECK(Percentile(Vec{7}, 0.975) == 7.0);
}

TEST_CASE("index sampler is uniform and seeded") {
  IndexSampler a(5), b(5);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const std::size_t k = a.Next(7);
    CHECK(k == b.Next(7));
    ++counts[k];
  }
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("bootstrap is reproducible and recovers the sign") {
  const auto records = Records(40, 10, 1);
  const BootstrapOptions opts{.iterations = 200, .subset_questions = 20,
                              .responses_per_question = 10, .seed = 9, .workers = 4};
  const BootstrapSummary a = BootstrapEvaluate(records, opts);
  BootstrapOptions single = opts;
  single.workers = 1;
  const BootstrapSummary b = BootstrapEvaluate(records, single);
  CHECK(a == b);
  CHECK(a.iterations + a.skipped == 200);
  CHECK(a.pcc.mean <= -0.9);
  CHECK(a.src.mean <= -0.9);
  CHECK(a.kendall.mean <= -0.9);
  CHECK(BootstrapSummaryFromJson(BootstrapSummaryToJson(a)) == a);

  BootstrapOptions other = opts;
  other.seed = 10;
  CHECK_FALSE(BootstrapEvaluate(records, other) == a);
}

TEST_CASE("bootstrap degenerate inputs") {
  std::vector<EvaluationRecord> flat;
  for (int q = 0; q < 5; ++q) flat.push_back({"q" + std::to_string(q), 0.5, 0.1 * q, "m", "x"});
  CHECK_THROWS_AS(BootstrapEvaluate(flat, {.iterations = 20, .subset_questions = 5}), Error);
  CHECK_THROWS_AS(BootstrapEvaluate(std::span(flat).first(1), {.iterations = 5}), Error);
}

TEST_CASE("record json") {
  const EvaluationRecord r{"q1", 0.25, 0.5, "topo-uq", "mock"};
  CHECK(EvaluationRecordFromJson(EvaluationRecordToJson(r)) == r);
}

}
