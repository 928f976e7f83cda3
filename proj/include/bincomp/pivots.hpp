#pragma once

#include "bincomp/common.hpp"

#include <Eigen/QR>

namespace bincomp {

/// Indices of a well-conditioned square subblock of a matrix, found by
/// column-pivoted QR: first k independent columns, then k independent rows
/// of the selected column block.
struct PivotSelection {
  IndexList column_indices;
  IndexList row_indices;
  Index numerical_rank = 0;
  double rank_tolerance = 0.0;
};

namespace detail {

/// Pivot order and numerical rank from a Businger-Golub column-pivoted QR.
/// Rank counts diagonal entries of R above tol times the leading one.
inline std::pair<IndexList, Index> qr_pivots(const Matrix& M, double tol) {
  Eigen::ColPivHouseholderQR<Matrix> qr(M);
  const Index kmax = std::min(M.rows(), M.cols());
  Vector diag = qr.matrixQR().diagonal().head(kmax).cwiseAbs();
  Index rank = 0;
  if (kmax > 0 && diag[0] > 0.0) {
    while (rank < kmax && diag[rank] > tol * diag[0]) ++rank;
  }
  const auto& perm = qr.colsPermutation().indices();
  IndexList order(static_cast<std::size_t>(M.cols()));
  for (Index j = 0; j < M.cols(); ++j) order[static_cast<std::size_t>(j)] = perm[j];
  return {order, rank};
}

}  // namespace detail

/// Selects k linearly independent columns of M and k linearly independent
/// rows of the chosen column block. Pass kAutoRank to detect k.
/// Throws RankDeficient when an explicit k exceeds the numerical rank.
inline PivotSelection select_pivots(const Matrix& M, Index k = kAutoRank, double tol = 1e-10) {
  if (M.size() == 0) throw std::invalid_argument("select_pivots: empty matrix");
  if (!(tol > 0.0)) throw std::invalid_argument("select_pivots: tol must be positive");

  auto [col_order, rank] = detail::qr_pivots(M, tol);
  if (k == kAutoRank) {
    k = rank;
  } else if (k > rank) {
    throw RankDeficient("select_pivots: requested rank " + std::to_string(k) +
                        " exceeds numerical rank " + std::to_string(rank));
  } else if (k < 0) {
    throw std::invalid_argument("select_pivots: negative rank");
  }

  PivotSelection sel;
  sel.numerical_rank = k;
  sel.rank_tolerance = tol;
  sel.column_indices.assign(col_order.begin(), col_order.begin() + k);
  if (k == 0) return sel;

  Matrix block(M.rows(), k);
  for (Index j = 0; j < k; ++j) block.col(j) = M.col(sel.column_indices[static_cast<std::size_t>(j)]);
  auto [row_order, block_rank] = detail::qr_pivots(block.transpose(), tol);
  if (block_rank < k)
    throw RankDeficient("select_pivots: selected column block is rank deficient");
  sel.row_indices.assign(row_order.begin(), row_order.begin() + k);
  return sel;
}

/// The square subblock M(rows, cols) named by a selection.
inline Matrix pivot_block(const Matrix& M, const PivotSelection& sel) {
  const Index k = sel.numerical_rank;
  Matrix B(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j)
      B(i, j) = M(sel.row_indices[static_cast<std::size_t>(i)],
                  sel.column_indices[static_cast<std::size_t>(j)]);
  return B;
}

}  // namespace bincomp
