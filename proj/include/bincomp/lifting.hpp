#pragma once

#include "bincomp/common.hpp"

#include <Eigen/LU>

#include <algorithm>

namespace bincomp {

enum class HullMode { affine, span };

/// Maps a k-bit code on the anchor rows to a full m-dimensional candidate
/// column: b |-> Z (b - p_R) + p. The rows of Z at the anchors are the
/// identity, so anchor coordinates reproduce the code bits exactly and never
/// need checking.
struct LiftingMap {
  Matrix Z;              // m x k
  Vector origin;         // p; the zero vector in span mode
  IndexList anchor_rows; // k global row indices
  HullMode mode = HullMode::affine;

  Index rows() const { return Z.rows(); }
  Index dim() const { return Z.cols(); }

  /// p restricted to the anchor rows.
  Vector anchor_origin() const {
    Vector pr(dim());
    for (Index i = 0; i < dim(); ++i) pr[i] = origin[anchor_rows[static_cast<std::size_t>(i)]];
    return pr;
  }

  /// Code bits as a 0/1 vector of length dim().
  Vector code_bits(Code code) const {
    Vector b(dim());
    for (Index i = 0; i < dim(); ++i) b[i] = (code >> i) & 1u ? 1.0 : 0.0;
    return b;
  }

  /// The candidate column for a code.
  Vector lift(Code code) const {
    if (dim() == 0) return origin;
    return Z * (code_bits(code) - anchor_origin()) + origin;
  }

  bool is_anchor(Index row) const {
    return std::find(anchor_rows.begin(), anchor_rows.end(), row) != anchor_rows.end();
  }
};

/// Builds the lifting map from a full-column-rank matrix Y (m x k), anchor
/// rows R with Y_R invertible, and the offset p: Z = Y (Y_R)^{-1}. Anchor
/// rows of Z are set to the exact identity they equal by construction.
inline LiftingMap make_lifting(const Matrix& Y, const IndexList& anchor_rows, const Vector& p,
                               HullMode mode) {
  const Index k = Y.cols();
  if (static_cast<Index>(anchor_rows.size()) != k)
    throw DimensionMismatch("make_lifting: anchor count must equal basis width");
  LiftingMap lm;
  lm.origin = p;
  lm.anchor_rows = anchor_rows;
  lm.mode = mode;
  if (k == 0) {
    lm.Z = Matrix(Y.rows(), 0);
    return lm;
  }
  Matrix Yr(k, k);
  for (Index i = 0; i < k; ++i) Yr.row(i) = Y.row(anchor_rows[static_cast<std::size_t>(i)]);
  Eigen::PartialPivLU<Matrix> lu(Yr.transpose());
  lm.Z = lu.solve(Y.transpose()).transpose();
  for (Index i = 0; i < k; ++i) {
    lm.Z.row(anchor_rows[static_cast<std::size_t>(i)]).setZero();
    lm.Z(anchor_rows[static_cast<std::size_t>(i)], i) = 1.0;
  }
  return lm;
}

/// A surviving set of candidate codes under partial row filtering.
struct CandidateBatch {
  LiftingMap lifting;
  std::vector<Code> codes;  // sorted ascending, unique
  IndexList checked_rows;
};

/// All 2^k codes for a lifting map (k <= kMaxCodeBits).
inline CandidateBatch make_full_batch(LiftingMap lifting) {
  const Index k = lifting.dim();
  if (k > kMaxCodeBits)
    throw CandidateOverflow("make_full_batch: " + std::to_string(k) + " code bits exceeds cap " +
                            std::to_string(kMaxCodeBits));
  CandidateBatch batch;
  batch.lifting = std::move(lifting);
  const std::uint64_t total = 1ULL << k;
  batch.codes.resize(total);
  for (std::uint64_t u = 0; u < total; ++u) batch.codes[u] = static_cast<Code>(u);
  return batch;
}

/// Keeps the codes whose lifted coordinate lies within tol_binary of {0,1}
/// on every row of row_order, in order. Rows must be disjoint from the
/// anchors and from already checked rows.
inline CandidateBatch filter_candidates_incremental(const CandidateBatch& batch,
                                                    const IndexList& row_order,
                                                    double tol_binary) {
  for (Index row : row_order) {
    if (row < 0 || row >= batch.lifting.rows())
      throw std::invalid_argument("filter_candidates_incremental: row out of range");
    if (batch.lifting.is_anchor(row))
      throw std::invalid_argument("filter_candidates_incremental: row " + std::to_string(row) +
                                  " is an anchor row");
    if (std::find(batch.checked_rows.begin(), batch.checked_rows.end(), row) !=
        batch.checked_rows.end())
      throw std::invalid_argument("filter_candidates_incremental: row " + std::to_string(row) +
                                  " already checked");
  }

  const Index k = batch.lifting.dim();
  const Vector pr = batch.lifting.anchor_origin();
  CandidateBatch out;
  out.lifting = batch.lifting;
  out.checked_rows = batch.checked_rows;
  out.codes = batch.codes;
  for (Index row : row_order) {
    const auto z = batch.lifting.Z.row(row);
    const double offset = batch.lifting.origin[row] - z.dot(pr);
    std::vector<Code> survivors;
    survivors.reserve(out.codes.size());
    for (Code code : out.codes) {
      double value = offset;
      for (Index i = 0; i < k; ++i)
        if ((code >> i) & 1u) value += z[i];
      if (binary_distance(value) <= tol_binary) survivors.push_back(code);
    }
    out.codes = std::move(survivors);
    out.checked_rows.push_back(row);
  }
  return out;
}

}  // namespace bincomp
