#pragma once

#include "bincomp/box_feasibility.hpp"
#include "bincomp/common.hpp"
#include "bincomp/lifting.hpp"
#include "bincomp/pivots.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <utility>

namespace bincomp {

enum class PruningMode { full, incremental, ilp };

/// All hypercube vertices found in the affine hull (or span) of the data
/// columns, sorted by code.
struct VertexSet {
  Matrix vertices;          // m x count, entries exactly 0/1
  std::vector<Code> codes;  // ascending

  Index count() const { return static_cast<Index>(codes.size()); }
};

/// Lifting map of aff(D) anchored at the column mean. With explicit r the
/// detected affine dimension must equal r-1.
inline LiftingMap affine_lifting(const Matrix& D, Index r = kAutoRank, double rank_tol = 1e-10) {
  if (D.size() == 0) throw std::invalid_argument("affine_lifting: empty matrix");
  if (r != kAutoRank && (r < 2 || r > std::min(D.rows(), D.cols()) + 1))
    throw std::invalid_argument("affine_lifting: r out of range");
  const Vector p = D.rowwise().mean();
  const Matrix P = D.colwise() - p;
  PivotSelection sel = select_pivots(P, kAutoRank, rank_tol);
  if (r != kAutoRank && sel.numerical_rank != r - 1)
    throw RankMismatch("affine_lifting: detected affine dimension " +
                       std::to_string(sel.numerical_rank) + ", expected " + std::to_string(r - 1));
  Matrix Y(P.rows(), sel.numerical_rank);
  for (Index j = 0; j < sel.numerical_rank; ++j)
    Y.col(j) = P.col(sel.column_indices[static_cast<std::size_t>(j)]);
  return make_lifting(Y, sel.row_indices, p, HullMode::affine);
}

/// Lifting map of span(D). With explicit r the detected rank must equal r.
inline LiftingMap span_lifting(const Matrix& D, Index r = kAutoRank, double rank_tol = 1e-10) {
  if (D.size() == 0) throw std::invalid_argument("span_lifting: empty matrix");
  if (r != kAutoRank && (r < 1 || r > std::min(D.rows(), D.cols())))
    throw std::invalid_argument("span_lifting: r out of range");
  PivotSelection sel = select_pivots(D, kAutoRank, rank_tol);
  if (r != kAutoRank && sel.numerical_rank != r)
    throw RankMismatch("span_lifting: detected rank " + std::to_string(sel.numerical_rank) +
                       ", expected " + std::to_string(r));
  Matrix Y(D.rows(), sel.numerical_rank);
  for (Index j = 0; j < sel.numerical_rank; ++j)
    Y.col(j) = D.col(sel.column_indices[static_cast<std::size_t>(j)]);
  return make_lifting(Y, sel.row_indices, Vector::Zero(D.rows()), HullMode::span);
}

namespace detail {

/// Non-anchor rows ordered by descending count of nonzero lifting weights;
/// rows with many nonzero weights prune hardest.
inline IndexList pruning_row_order(const LiftingMap& lm) {
  IndexList rows;
  for (Index i = 0; i < lm.rows(); ++i)
    if (!lm.is_anchor(i)) rows.push_back(i);
  std::vector<Index> nnz(rows.size());
  for (std::size_t s = 0; s < rows.size(); ++s) {
    Index count = 0;
    for (Index j = 0; j < lm.dim(); ++j)
      if (std::abs(lm.Z(rows[s], j)) > 1e-12) ++count;
    nnz[s] = count;
  }
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return nnz[a] > nnz[b]; });
  IndexList sorted(rows.size());
  for (std::size_t s = 0; s < rows.size(); ++s) sorted[s] = rows[order[s]];
  return sorted;
}

/// Single-row filter of all 2^k codes via a Gray-code walk: the running row
/// value changes by one weight per step.
inline std::vector<Code> scan_row_full(const LiftingMap& lm, Index row, double tol) {
  const Index k = lm.dim();
  const Vector pr = lm.anchor_origin();
  const auto z = lm.Z.row(row);
  const double offset = lm.origin[row] - z.dot(pr);
  const std::uint64_t total = 1ULL << k;
  std::vector<Code> survivors;
  Code gray = 0;
  double value = offset;
  for (std::uint64_t u = 0; u < total; ++u) {
    if (u > 0) {
      int flip = std::countr_zero(u);
      gray ^= Code{1} << flip;
      value += (gray >> flip) & 1u ? z[flip] : -z[flip];
      if ((u & 0xFFFFu) == 0) {  // refresh against drift
        value = offset;
        for (Index j = 0; j < k; ++j)
          if ((gray >> j) & 1u) value += z[j];
      }
    }
    if (binary_distance(value) <= tol) survivors.push_back(gray);
  }
  return survivors;
}

/// Filters given codes against one row (direct dot products).
inline void filter_codes_row(const LiftingMap& lm, Index row, double tol, std::vector<Code>& codes) {
  const Index k = lm.dim();
  const Vector pr = lm.anchor_origin();
  const auto z = lm.Z.row(row);
  const double offset = lm.origin[row] - z.dot(pr);
  std::vector<Code> survivors;
  survivors.reserve(codes.size());
  for (Code code : codes) {
    double value = offset;
    for (Index j = 0; j < k; ++j)
      if ((code >> j) & 1u) value += z[j];
    if (binary_distance(value) <= tol) survivors.push_back(code);
  }
  codes = std::move(survivors);
}

/// Full Gray-code enumeration: every candidate column is checked on all
/// non-anchor rows.
inline std::vector<Code> enumerate_full(const LiftingMap& lm, double tol) {
  const Index k = lm.dim(), m = lm.rows();
  IndexList check_rows;
  for (Index i = 0; i < m; ++i)
    if (!lm.is_anchor(i)) check_rows.push_back(i);
  const std::uint64_t total = 1ULL << k;
  std::vector<Code> survivors;
  Code gray = 0;
  Vector t = lm.lift(0);
  for (std::uint64_t u = 0; u < total; ++u) {
    if (u > 0) {
      int flip = std::countr_zero(u);
      gray ^= Code{1} << flip;
      if ((gray >> flip) & 1u)
        t += lm.Z.col(flip);
      else
        t -= lm.Z.col(flip);
      if ((u & 0xFFFFu) == 0) t = lm.lift(gray);
    }
    bool ok = true;
    for (Index i : check_rows) {
      if (binary_distance(t[i]) > tol) {
        ok = false;
        break;
      }
    }
    if (ok) survivors.push_back(gray);
  }
  return survivors;
}

inline std::vector<Code> enumerate_incremental(const LiftingMap& lm, double tol) {
  IndexList rows = pruning_row_order(lm);
  if (rows.empty()) {
    std::vector<Code> all(1ULL << lm.dim());
    for (std::uint64_t u = 0; u < all.size(); ++u) all[u] = static_cast<Code>(u);
    return all;
  }
  std::vector<Code> codes = scan_row_full(lm, rows[0], tol);
  for (std::size_t s = 1; s < rows.size() && !codes.empty(); ++s)
    filter_codes_row(lm, rows[s], tol, codes);
  return codes;
}

inline std::vector<Code> enumerate_ilp(const LiftingMap& lm, double tol) {
  if (lm.rows() == lm.dim() || lm.dim() == 0) return enumerate_incremental(lm, tol);
  BoxFeasibilityProblem prob = box_problem_from_lifting(lm);
  SolutionPool pool = solve_box_feasibility(prob, std::max(tol, 1e-7));
  if (pool.truncated)
    throw CandidateOverflow("vertex enumeration: box-feasibility pool truncated");
  std::vector<Code> codes = std::move(pool.codes);
  for (Index i = 0; i < lm.rows() && !codes.empty(); ++i) {
    if (lm.is_anchor(i)) continue;
    filter_codes_row(lm, i, tol, codes);
  }
  return codes;
}

inline VertexSet materialize(const LiftingMap& lm, std::vector<Code> codes) {
  std::sort(codes.begin(), codes.end());
  VertexSet vs;
  vs.vertices.resize(lm.rows(), static_cast<Index>(codes.size()));
  for (std::size_t s = 0; s < codes.size(); ++s) {
    Vector t = lm.lift(codes[s]);
    for (Index i = 0; i < t.size(); ++i) t[i] = t[i] > 0.5 ? 1.0 : 0.0;
    vs.vertices.col(static_cast<Index>(s)) = t;
  }
  vs.codes = std::move(codes);
  return vs;
}

inline VertexSet enumerate_vertices(const LiftingMap& lm, double tol, PruningMode mode) {
  if (lm.dim() > kMaxCodeBits)
    throw CandidateOverflow("vertex enumeration: " + std::to_string(lm.dim()) +
                            " code bits exceeds cap " + std::to_string(kMaxCodeBits));
  std::vector<Code> codes;
  switch (mode) {
    case PruningMode::full: codes = enumerate_full(lm, tol); break;
    case PruningMode::incremental: codes = enumerate_incremental(lm, tol); break;
    case PruningMode::ilp: codes = enumerate_ilp(lm, tol); break;
  }
  return materialize(lm, std::move(codes));
}

}  // namespace detail

/// {0,1}^m intersected with the affine hull of the columns of D.
/// At most 2^(r-1) vertices exist; enumeration checks exactly those codes.
inline VertexSet find_vertices_affine(const Matrix& D, Index r = kAutoRank,
                                      double tol_binary = 1e-8,
                                      PruningMode pruning = PruningMode::incremental) {
  LiftingMap lm = affine_lifting(D, r);
  return detail::enumerate_vertices(lm, tol_binary, pruning);
}

/// {0,1}^m intersected with the span of the columns of D (always contains
/// the zero vector).
inline VertexSet find_vertices_span(const Matrix& D, Index r = kAutoRank,
                                    double tol_binary = 1e-8,
                                    PruningMode pruning = PruningMode::incremental) {
  LiftingMap lm = span_lifting(D, r);
  return detail::enumerate_vertices(lm, tol_binary, pruning);
}

}  // namespace bincomp
