#pragma once

#include "bincomp/common.hpp"
#include "bincomp/lifting.hpp"

#include <algorithm>
#include <numeric>

namespace bincomp {

/// The 0-1 feasibility system: find all b in {0,1}^k with
/// -tol <= weights.row(i) * b + offsets[i] <= 1 + tol for every i.
struct BoxFeasibilityProblem {
  Matrix weights;  // one row per constraint, k columns
  Vector offsets;  // one entry per constraint
};

struct SolutionPool {
  std::vector<Code> codes;  // sorted ascending
  std::uint64_t nodes_explored = 0;
  bool truncated = false;
};

/// Constraint system of the non-anchor rows of a lifting map: row i becomes
/// weights = Z_i, offset = p_i - Z_i p_R.
inline BoxFeasibilityProblem box_problem_from_lifting(const LiftingMap& lm) {
  const Index m = lm.rows(), k = lm.dim();
  const Vector pr = lm.anchor_origin();
  BoxFeasibilityProblem prob;
  prob.weights.resize(m - k, k);
  prob.offsets.resize(m - k);
  Index out = 0;
  for (Index i = 0; i < m; ++i) {
    if (lm.is_anchor(i)) continue;
    prob.weights.row(out) = lm.Z.row(i);
    prob.offsets[out] = lm.origin[i] - lm.Z.row(i).dot(pr);
    ++out;
  }
  return prob;
}

namespace detail {

struct BoxSearch {
  const Matrix& W;
  const Vector& o;
  double lo, hi;
  std::uint64_t max_pool;
  Index k, mrows;

  IndexList order;       // static branch order
  Vector curdot, remmin, remmax;
  Code partial = 0;
  SolutionPool pool;
  bool aborted = false;

  BoxSearch(const BoxFeasibilityProblem& p, double tol, std::uint64_t cap)
      : W(p.weights), o(p.offsets), lo(-tol), hi(1.0 + tol), max_pool(cap),
        k(p.weights.cols()), mrows(p.weights.rows()) {
    order.resize(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), Index{0});
    Vector score = W.cwiseAbs().colwise().sum();
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return score[a] > score[b]; });
    curdot = Vector::Zero(mrows);
    remmin = Vector::Zero(mrows);
    remmax = Vector::Zero(mrows);
    for (Index i = 0; i < mrows; ++i)
      for (Index j = 0; j < k; ++j) {
        double w = W(i, j);
        if (w < 0)
          remmin[i] += w;
        else
          remmax[i] += w;
      }
  }

  bool viable() const {
    for (Index i = 0; i < mrows; ++i) {
      double base = o[i] + curdot[i];
      if (base + remmax[i] < lo || base + remmin[i] > hi) return false;
    }
    return true;
  }

  void fix(Index var, int value) {
    for (Index i = 0; i < mrows; ++i) {
      double w = W(i, var);
      if (value) curdot[i] += w;
      if (w < 0)
        remmin[i] -= w;
      else
        remmax[i] -= w;
    }
    if (value) partial |= Code{1} << var;
  }

  void unfix(Index var, int value) {
    for (Index i = 0; i < mrows; ++i) {
      double w = W(i, var);
      if (value) curdot[i] -= w;
      if (w < 0)
        remmin[i] += w;
      else
        remmax[i] += w;
    }
    if (value) partial &= ~(Code{1} << var);
  }

  /// Branch value explored first: the one keeping more running constraint
  /// values inside the box.
  int first_value(Index var) const {
    int keep0 = 0, keep1 = 0;
    for (Index i = 0; i < mrows; ++i) {
      double base = o[i] + curdot[i];
      if (base >= lo && base <= hi) ++keep0;
      double with = base + W(i, var);
      if (with >= lo && with <= hi) ++keep1;
    }
    return keep1 > keep0 ? 1 : 0;
  }

  void recurse(Index depth) {
    if (aborted) return;
    ++pool.nodes_explored;
    if (!viable()) return;
    if (depth == k) {
      if (pool.codes.size() >= max_pool) {
        pool.truncated = true;
        aborted = true;
        return;
      }
      pool.codes.push_back(partial);
      return;
    }
    Index var = order[static_cast<std::size_t>(depth)];
    int first = first_value(var);
    for (int step = 0; step < 2; ++step) {
      int value = step == 0 ? first : 1 - first;
      fix(var, value);
      recurse(depth + 1);
      unfix(var, value);
      if (aborted) return;
    }
  }
};

}  // namespace detail

/// Enumerates every feasible code by depth-first branch and bound with
/// interval pruning. When the pool would exceed max_pool the search stops
/// and the (sound, incomplete) result is flagged truncated.
inline SolutionPool solve_box_feasibility(const BoxFeasibilityProblem& problem,
                                          double feas_tol = 1e-7,
                                          std::uint64_t max_pool = 1ULL << 20) {
  const Index k = problem.weights.cols();
  if (k < 1) throw std::invalid_argument("solve_box_feasibility: need at least one variable");
  if (k > kMaxCodeBits)
    throw CandidateOverflow("solve_box_feasibility: " + std::to_string(k) +
                            " variables exceeds cap " + std::to_string(kMaxCodeBits));
  if (max_pool < 1) throw std::invalid_argument("solve_box_feasibility: max_pool must be >= 1");
  if (problem.weights.rows() != problem.offsets.size())
    throw DimensionMismatch("solve_box_feasibility: weights/offsets row mismatch");

  detail::BoxSearch search(problem, feas_tol, max_pool);
  search.recurse(0);
  std::sort(search.pool.codes.begin(), search.pool.codes.end());
  return std::move(search.pool);
}

}  // namespace bincomp
