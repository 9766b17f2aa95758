#include <doctest.h>

#include <random>

#include "testing.hpp"
#include "topouq/assignment.hpp"
#include "topouq/reason_ged.hpp"

using namespace topouq;
using namespace topouq::testing;

TEST_SUITE("assignment") {

TEST_CASE("small fixtures") {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 3, 0;
  const auto ra = SolveLinearAssignment(a);
  CHECK(ra.cost == 1.0);
  CHECK(ra.col_for_row == std::vector<Eigen::Index>{0, 1});

  Eigen::MatrixXd b(3, 3);
  b << 4, 1, 3, 2, 0, 5, 3, 2, 2;
  const auto rb = SolveLinearAssignment(b);
  CHECK(rb.cost == 5.0);
  CHECK(rb.col_for_row == std::vector<Eigen::Index>{1, 0, 2});

  Eigen::MatrixXd c = Eigen::MatrixXd::Ones(4, 4);
  c.diagonal().setZero();
  const auto rc = SolveLinearAssignment(c);
  CHECK(rc.cost == 0.0);
  CHECK(rc.col_for_row == std::vector<Eigen::Index>{0, 1, 2, 3});

  CHECK(SolveLinearAssignment(Eigen::MatrixXd(0, 0)).cost == 0.0);
  CHECK_THROWS_AS(SolveLinearAssignment(Eigen::MatrixXd::Zero(2, 3)), Error);
}

TEST_CASE("augmented matrix layout") {
  Eigen::MatrixXd sub(1, 1);
  sub << 0.2;
  const std::vector<double> del = {0.9}, ins = {0.9};
  const CostMatrix c = BuildAugmentedMatrix(sub, del, ins);
  Eigen::MatrixXd want(2, 2);
  want << 0.2, 0.9, 0.9, 0.0;
  CHECK(c.values == want);
  const AssignmentResult r = SolveAssignment(c);
  CHECK(r.total_cost == doctest::Approx(0.2));
  CHECK(r.matching.pairs.size() == 1);

  const std::vector<double> del2 = {0.3, 0.4}, none;
  const CostMatrix d = BuildAugmentedMatrix(Eigen::MatrixXd(2, 0), del2, none);
  Eigen::MatrixXd want2(2, 2);
  want2 << 0.3, kForbiddenCost, kForbiddenCost, 0.4;
  CHECK(d.values == want2);
  const AssignmentResult rd = SolveAssignment(d);
  CHECK(rd.matching.unmatched_left == std::vector<Eigen::Index>{0, 1});
  CHECK(rd.total_cost == 0.3 + 0.4);

  const CostMatrix e = BuildAugmentedMatrix(Eigen::MatrixXd(0, 0), none, none);
  CHECK(e.values.size() == 0);
  CHECK(SolveAssignment(e).total_cost == 0.0);

  CHECK_THROWS_AS(BuildAugmentedMatrix(Eigen::MatrixXd(1, 2), del, ins), Error);
}

TEST_CASE("exact sums") {
  CHECK(ExactSum<double>({1e16, 1.0, -1e16}) == 1.0);
  CHECK(ExactSum<double>({}) == 0.0);
  CHECK(ExactSum<double>({1.0}) == ExactSum<double>({0.5, 0.5}));
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> xs(Uniform(rng, 1, 12));
    for (double& x : xs) x = trial % 3 == 0 ? std::ldexp(unit(rng), -static_cast<int>(rng() % 60)) : unit(rng);
    const double s = ExactSum(xs);
    CHECK(s == OracleExactSum(xs));
    std::shuffle(xs.begin(), xs.end(), rng);
    CHECK(ExactSum(xs) == s);
  }
}

TEST_CASE("matches brute force on random matrices") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> real(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<Eigen::Index>(Uniform(rng, 1, 5));
    Eigen::MatrixXd m(n, n);
    const bool integer = trial % 2 == 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        m(i, j) = integer ? static_cast<double>(rng() % 10) : real(rng);
      }
    }
    CHECK(SolveLinearAssignment(m).cost == BruteForceAssignment(m));
  }
}

}
