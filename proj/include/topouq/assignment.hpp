#pragma once

// Minimum-cost perfect assignment on a square dense matrix (Kuhn-Munkres in
// the shortest-augmenting-path form with row/column potentials, O(n^3)).
//
// Rows are inserted one at a time. For each new row a Dijkstra-like sweep
// over the columns grows an alternating tree in the equality subgraph of the
// reduced costs c(i, j) - u(i) - v(j); the potentials are shifted by the
// smallest slack until a free column is reached, and the matching is
// augmented along the tree path.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "topouq/error.hpp"

namespace topouq {

// Correctly rounded floating-point sum (Shewchuk's partials with the
// half-way fix-up from CPython's math.fsum). Inputs must be finite.
template <typename Scalar>
Scalar ExactSum(const std::vector<Scalar>& xs) {
  std::vector<Scalar> partials;
  for (Scalar x : xs) {
    std::size_t kept = 0;
    for (std::size_t k = 0; k < partials.size(); ++k) {
      Scalar y = partials[k];
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const Scalar hi = x + y;
      const Scalar lo = y - (hi - x);
      if (lo != Scalar(0)) partials[kept++] = lo;
      x = hi;
    }
    partials.resize(kept);
    partials.push_back(x);
  }
  if (partials.empty()) return Scalar(0);

  std::size_t n = partials.size();
  Scalar hi = partials[--n];
  Scalar lo(0);
  while (n > 0) {
    const Scalar x = hi;
    const Scalar y = partials[--n];
    hi = x + y;
    lo = y - (hi - x);
    if (lo != Scalar(0)) break;
  }
  // Round half to even across the remaining partials.
  if (n > 0 && ((lo < 0 && partials[n - 1] < 0) || (lo > 0 && partials[n - 1] > 0))) {
    const Scalar y = lo * Scalar(2);
    const Scalar x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

template <typename Scalar>
struct Assignment {
  std::vector<Eigen::Index> col_for_row;
  // Correctly rounded sum of the chosen entries. Tied matchings (say one
  // substitution at 1 against a deletion and an insertion at 0.5 each) thus
  // report bitwise-identical totals whatever the summation order.
  Scalar cost = Scalar(0);
};

template <typename Derived>
Assignment<typename Derived::Scalar> SolveLinearAssignment(
    const Eigen::MatrixBase<Derived>& cost) {
  using Scalar = typename Derived::Scalar;
  using Index = Eigen::Index;
  if (cost.rows() != cost.cols()) {
    throw Error(ErrorKind::kShapeMismatch, "assignment matrix must be square");
  }
  const Index n = cost.rows();
  Assignment<Scalar> result;
  if (n == 0) return result;

  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  // 1-based; column 0 is the virtual root of each alternating tree.
  std::vector<Scalar> u(n + 1, Scalar(0)), v(n + 1, Scalar(0));
  std::vector<Index> row_of_col(n + 1, 0), way(n + 1, 0);

  for (Index i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    Index j0 = 0;
    std::vector<Scalar> min_slack(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const Index i0 = row_of_col[j0];
      Scalar delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const Scalar reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (reduced < min_slack[j]) {
          min_slack[j] = reduced;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != 0);
    do {
      const Index j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  result.col_for_row.assign(static_cast<std::size_t>(n), 0);
  for (Index j = 1; j <= n; ++j) {
    result.col_for_row[static_cast<std::size_t>(row_of_col[j] - 1)] = j - 1;
  }
  std::vector<Scalar> chosen(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    chosen[static_cast<std::size_t>(i)] = cost(i, result.col_for_row[static_cast<std::size_t>(i)]);
  }
  result.cost = ExactSum<Scalar>(chosen);
  return result;
}

}  // namespace topouq
