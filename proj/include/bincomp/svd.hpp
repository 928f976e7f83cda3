#pragma once

#include "bincomp/common.hpp"

#include <Eigen/SVD>

namespace bincomp {

/// Orthonormal basis of a dominant left singular subspace together with the
/// corresponding singular values (non-increasing).
struct SpectralBasis {
  Matrix basis;            // m x k, orthonormal columns
  Vector singular_values;  // k entries, sorted non-increasing
};

/// Left singular vectors of the k largest singular values of M.
inline SpectralBasis truncated_svd(const Matrix& M, Index k) {
  if (k <= 0) throw std::invalid_argument("truncated_svd: k must be positive");
  if (k > std::min(M.rows(), M.cols()))
    throw DimensionMismatch("truncated_svd: k = " + std::to_string(k) + " exceeds min(m,n) = " +
                            std::to_string(std::min(M.rows(), M.cols())));
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU);
  SpectralBasis out;
  out.basis = svd.matrixU().leftCols(k);
  out.singular_values = svd.singularValues().head(k);
  return out;
}

}  // namespace bincomp
