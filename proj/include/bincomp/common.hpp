#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bincomp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

/// Bit pattern of the anchor-row coordinates of a candidate vertex.
/// Bit k corresponds to anchor row k (enumeration is capped at 30 bits).
using Code = std::uint32_t;

/// Sentinel for "infer the rank from the data".
inline constexpr Index kAutoRank = -1;

/// Hard cap on the candidate-code width; 2^k candidates are enumerated.
inline constexpr Index kMaxCodeBits = 30;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RankDeficient : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct ConvergenceFailure : Error {
  using Error::Error;
};
struct RankMismatch : Error {
  using Error::Error;
};
struct CandidateOverflow : Error {
  using Error::Error;
};
struct NoExactFactorization : Error {
  using Error::Error;
};
struct AmbiguousSelection : Error {
  using Error::Error;
};
struct DegenerateRows : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct RaggedRows : Error {
  using Error::Error;
};

/// True if every entry of M equals 0.0 or 1.0 exactly.
inline bool is_binary(const Matrix& M) {
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i)
      if (M(i, j) != 0.0 && M(i, j) != 1.0) return false;
  return true;
}

/// Distance of x to the nearest of {lo, hi}.
inline double binary_distance(double x, double lo = 0.0, double hi = 1.0) {
  double a = std::abs(x - lo), b = std::abs(x - hi);
  return a < b ? a : b;
}

}  // namespace bincomp
