#pragma once

#include "bincomp/common.hpp"

#include <limits>
#include <vector>

namespace bincomp {

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian
/// algorithm with potentials, O(n^3)). Returns a[i] = column matched to
/// row i.
inline IndexList solve_assignment(const Matrix& cost) {
  if (cost.rows() != cost.cols()) throw DimensionMismatch("solve_assignment: matrix must be square");
  const Index n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();

  // 1-based internal arrays; p[j] = row assigned to column j
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<Index> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      Index i0 = p[static_cast<std::size_t>(j0)], j1 = 0;
      double delta = inf;
      for (Index j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      Index j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  IndexList assign(static_cast<std::size_t>(n));
  for (Index j = 1; j <= n; ++j) assign[static_cast<std::size_t>(p[static_cast<std::size_t>(j)]) - 1] = j - 1;
  return assign;
}

}  // namespace bincomp
