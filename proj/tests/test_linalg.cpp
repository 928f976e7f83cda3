#include "bincomp/assignment.hpp"
#include "bincomp/least_squares.hpp"
#include "bincomp/pivots.hpp"
#include "bincomp/rng.hpp"
#include "bincomp/svd.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/SVD>

using namespace bincomp;

namespace {

Matrix random_matrix(Rng& rng, Index m, Index n) {
  Matrix M(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) M(i, j) = rng.uniform(-1.0, 1.0);
  return M;
}

double smallest_singular_value(const Matrix& M) {
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues().minCoeff();
}

double largest_singular_value(const Matrix& M) {
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues().maxCoeff();
}

}  // namespace

TEST_CASE("select_pivots on the identity") {
  Matrix I = Matrix::Identity(3, 3);
  PivotSelection sel = select_pivots(I, 2);
  REQUIRE(sel.numerical_rank == 2);
  REQUIRE(sel.column_indices == IndexList{0, 1});
  REQUIRE(sel.row_indices == IndexList{0, 1});
}

TEST_CASE("select_pivots on degenerate input") {
  Matrix Z = Matrix::Zero(4, 3);
  PivotSelection sel = select_pivots(Z);
  REQUIRE(sel.numerical_rank == 0);
  REQUIRE(sel.column_indices.empty());
  REQUIRE_THROWS_AS(select_pivots(Z, 1), RankDeficient);
}

TEST_CASE("select_pivots detects rank of a sum of outer products") {
  Rng rng(17);
  Matrix M = Matrix::Zero(6, 5);
  for (int k = 0; k < 2; ++k) {
    Vector u = random_matrix(rng, 6, 1);
    Vector v = random_matrix(rng, 5, 1);
    M += u * v.transpose();
  }
  PivotSelection sel = select_pivots(M);
  REQUIRE(sel.numerical_rank == 2);

  // 2x2 determinant oracle on the selected block
  Matrix B = pivot_block(M, sel);
  double det = B(0, 0) * B(1, 1) - B(0, 1) * B(1, 0);
  REQUIRE(std::abs(det) > 1e-12);
}

TEST_CASE("select_pivots block is well conditioned relative to the input") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix M = random_matrix(rng, 8, 6);
    PivotSelection sel = select_pivots(M);
    Matrix B = pivot_block(M, sel);
    REQUIRE(smallest_singular_value(B) > sel.rank_tolerance * largest_singular_value(M));
  }
}

TEST_CASE("truncated_svd on a diagonal matrix") {
  Matrix M = Vector::LinSpaced(3, 3.0, 1.0).asDiagonal();  // diag(3,2,1)
  SpectralBasis sb = truncated_svd(M, 2);
  REQUIRE(sb.singular_values[0] == Catch::Approx(3.0));
  REQUIRE(sb.singular_values[1] == Catch::Approx(2.0));
  // basis spans e1, e2
  for (Index j = 0; j < 2; ++j) REQUIRE(std::abs(sb.basis(2, j)) < 1e-12);
}

TEST_CASE("truncated_svd at full rank reconstructs the input") {
  Rng rng(23);
  Matrix M = random_matrix(rng, 7, 4);
  SpectralBasis sb = truncated_svd(M, 4);
  Matrix reconstructed = sb.basis * (sb.basis.transpose() * M);
  REQUIRE((M - reconstructed).norm() <= 1e-8 * M.norm());
}

TEST_CASE("truncated_svd matches the Eckart-Young optimum") {
  Rng rng(29);
  Matrix M = random_matrix(rng, 20, 8);
  // frozen oracle: full SVD tail energy
  Eigen::JacobiSVD<Matrix> full(M);
  for (Index k : {1, 3, 5}) {
    SpectralBasis sb = truncated_svd(M, k);
    double err = (M - sb.basis * (sb.basis.transpose() * M)).squaredNorm();
    double tail = full.singularValues().tail(8 - k).squaredNorm();
    REQUIRE(err == Catch::Approx(tail).margin(1e-8));
  }
}

TEST_CASE("truncated_svd properties hold on random shapes up to 50x50") {
  Rng rng(31);
  for (int trial = 0; trial < 8; ++trial) {
    Index m = 2 + static_cast<Index>(rng.below(49));
    Index n = 2 + static_cast<Index>(rng.below(49));
    Index k = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(std::min(m, n))));
    Matrix M = random_matrix(rng, m, n);
    SpectralBasis sb = truncated_svd(M, k);
    Matrix gram = sb.basis.transpose() * sb.basis;
    REQUIRE((gram - Matrix::Identity(k, k)).lpNorm<Eigen::Infinity>() < 1e-10);
    for (Index i = 0; i + 1 < k; ++i) REQUIRE(sb.singular_values[i] >= sb.singular_values[i + 1]);
    // Eckart-Young equality against a full-decomposition oracle
    Eigen::JacobiSVD<Matrix> full(M);
    double err = (M - sb.basis * (sb.basis.transpose() * M)).squaredNorm();
    double tail = full.singularValues().tail(std::min(m, n) - k).squaredNorm();
    REQUIRE(err == Catch::Approx(tail).margin(1e-8 * M.squaredNorm()));
  }
  REQUIRE_THROWS_AS(truncated_svd(Matrix::Identity(3, 3), 4), DimensionMismatch);
}

TEST_CASE("least_squares basics") {
  Rng rng(37);
  SECTION("identity design") {
    Matrix D = random_matrix(rng, 4, 3);
    REQUIRE((least_squares(Matrix::Identity(4, 4), D) - D).norm() < 1e-12);
  }
  SECTION("consistent system is recovered") {
    Matrix T = random_matrix(rng, 10, 3);
    Matrix A0 = random_matrix(rng, 3, 5);
    Matrix A = least_squares(T, T * A0);
    REQUIRE((A - A0).norm() < 1e-8);
  }
  SECTION("hand-computed normal equations") {
    Matrix T(2, 1);
    T << 1, 1;
    Matrix D(2, 1);
    D << 0, 1;
    // T'T a = T'd  =>  2a = 1  =>  a = 0.5
    REQUIRE(least_squares(T, D)(0, 0) == Catch::Approx(0.5));
  }
  SECTION("residual is orthogonal to the column space") {
    for (int trial = 0; trial < 6; ++trial) {
      Matrix T = random_matrix(rng, 12, 4);
      Matrix D = random_matrix(rng, 12, 6);
      Matrix A = least_squares(T, D);
      REQUIRE((T.transpose() * (D - T * A)).norm() <= 1e-8 * D.norm());
    }
  }
  SECTION("rank-deficient design falls back to a solution") {
    Matrix T(4, 2);
    T << 1, 2, 1, 2, 1, 2, 1, 2;  // rank 1
    Matrix D(4, 1);
    D << 1, 1, 1, 1;
    Matrix A = least_squares(T, D);
    REQUIRE((T.transpose() * (D - T * A)).norm() < 1e-10);
  }
}

TEST_CASE("project_to_simplex is a valid projection") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    Index n = 1 + static_cast<Index>(rng.below(8));
    Vector y = random_matrix(rng, n, 1);
    Vector x = project_to_simplex(y);
    REQUIRE(x.minCoeff() >= 0.0);
    REQUIRE(x.sum() == Catch::Approx(1.0).margin(1e-12));
    // no feasible point sampled at random is closer
    for (int probe = 0; probe < 20; ++probe) {
      Vector z = Rng(static_cast<std::uint64_t>(trial * 100 + probe)).simplex(n);
      REQUIRE((x - y).squaredNorm() <= (z - y).squaredNorm() + 1e-12);
    }
  }
}

TEST_CASE("project_to_capped_simplex respects the cap") {
  Rng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    Index n = 4;
    double cap = 0.5;  // 2/r with r = 4
    Vector y = random_matrix(rng, n, 1);
    Vector x = project_to_capped_simplex(y, cap);
    REQUIRE(x.minCoeff() >= -1e-12);
    REQUIRE(x.maxCoeff() <= cap + 1e-12);
    REQUIRE(x.sum() == Catch::Approx(1.0).margin(1e-9));
  }
  // a feasible point projects to itself
  Vector y(4);
  y << 0.3, 0.3, 0.2, 0.2;
  REQUIRE((project_to_capped_simplex(y, 0.5) - y).norm() < 1e-9);
}

TEST_CASE("simplex_least_squares column contracts") {
  Rng rng(47);
  Matrix T = random_matrix(rng, 12, 4);

  SECTION("a column of T is matched by a canonical basis vector") {
    Matrix D = T.col(2);
    Matrix A = simplex_least_squares(T, D);
    Vector expected = Vector::Zero(4);
    expected[2] = 1.0;
    REQUIRE((A.col(0) - expected).lpNorm<Eigen::Infinity>() < 1e-6);
  }
  SECTION("midpoint of two columns gives weights one half each") {
    Matrix D = 0.5 * (T.col(0) + T.col(3));
    Matrix A = simplex_least_squares(T, D);
    REQUIRE(A(0, 0) == Catch::Approx(0.5).margin(1e-6));
    REQUIRE(A(3, 0) == Catch::Approx(0.5).margin(1e-6));
  }
  SECTION("random simplex-weighted data is recovered") {
    Matrix A0(4, 6);
    for (Index j = 0; j < 6; ++j) A0.col(j) = rng.simplex(4);
    Matrix A = simplex_least_squares(T, T * A0);
    REQUIRE((A - A0).lpNorm<Eigen::Infinity>() < 1e-6);
  }
  SECTION("feasibility and objective bound") {
    Matrix D = random_matrix(rng, 12, 5);
    Matrix A = simplex_least_squares(T, D);
    for (Index j = 0; j < A.cols(); ++j) {
      REQUIRE(A.col(j).minCoeff() >= -1e-10);
      REQUIRE(A.col(j).sum() == Catch::Approx(1.0).margin(1e-8));
      Vector projected = project_to_simplex(least_squares(T, D).col(j));
      double got = (D.col(j) - T * A.col(j)).squaredNorm();
      double reference = (D.col(j) - T * projected).squaredNorm();
      REQUIRE(got <= reference + 1e-12);
    }
  }
  SECTION("r = 1 forces the single weight to one") {
    Matrix T1 = random_matrix(rng, 5, 1);
    Matrix D = random_matrix(rng, 5, 2);
    Matrix A = simplex_least_squares(T1, D);
    REQUIRE(A(0, 0) == Catch::Approx(1.0));
    REQUIRE(A(0, 1) == Catch::Approx(1.0));
  }
}

TEST_CASE("solve_assignment equals exhaustive search") {
  Rng rng(53);
  for (int trial = 0; trial < 15; ++trial) {
    Index r = 2 + static_cast<Index>(rng.below(5));  // up to 6
    Matrix cost = random_matrix(rng, r, r).array() + 1.5;
    IndexList assign = solve_assignment(cost);
    std::vector<bool> used(static_cast<std::size_t>(r), false);
    double total = 0.0;
    for (Index i = 0; i < r; ++i) {
      Index j = assign[static_cast<std::size_t>(i)];
      REQUIRE(!used[static_cast<std::size_t>(j)]);
      used[static_cast<std::size_t>(j)] = true;
      total += cost(i, j);
    }
    REQUIRE(total == Catch::Approx(oracles::assignment_cost_bruteforce(cost)).margin(1e-9));
  }
}
