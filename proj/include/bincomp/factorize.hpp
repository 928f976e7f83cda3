#pragma once

#include "bincomp/common.hpp"
#include "bincomp/least_squares.hpp"
#include "bincomp/lifting.hpp"
#include "bincomp/pivots.hpp"
#include "bincomp/rng.hpp"
#include "bincomp/svd.hpp"
#include "bincomp/vertex_enum.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>

namespace bincomp {

enum class AConstraint { affine, free, simplex };
enum class Refinement { none, best_fit, backward_elim };
enum class ExactMode { affine, linear, simplex };

/// Factorization result D ~ T * A (or T * W * A when W is present).
/// T is stored with exact {0,1} entries; with binary levels (lo, hi) the
/// factor entering the product is lo + (hi - lo) * T.
struct FactorModel {
  Matrix T;
  Matrix A;
  std::optional<Matrix> W;
  AConstraint a_constraint = AConstraint::free;
  std::pair<double, double> binary_levels{0.0, 1.0};
  double residual_fro = 0.0;
  std::map<std::string, double> diagnostics;
};

struct ApproxConfig {
  Index r = 2;
  int restarts = 1;
  Refinement refine = Refinement::best_fit;
  int polish_block_iters = 0;
  std::pair<double, double> binary_levels{0.0, 1.0};
  AConstraint a_constraint = AConstraint::free;
  std::uint64_t seed = 0;
};

/// lo + (hi - lo) * T, the factor actually fitted against the data.
inline Matrix apply_levels(const Matrix& T, std::pair<double, double> levels) {
  if (levels.first == 0.0 && levels.second == 1.0) return T;
  return (T.array() * (levels.second - levels.first) + levels.first).matrix();
}

/// Row-separable exact update: row i of the result is the {0,1}^r vector
/// minimizing ||D_i - t A||_2^2, ties broken toward the smaller code.
/// Uses one shared table of t G t' values plus per-row subset sums.
inline Matrix update_T_rows(const Matrix& D, const Matrix& A) {
  const Index r = A.rows(), m = D.rows();
  if (D.cols() != A.cols()) throw DimensionMismatch("update_T_rows: column counts differ");
  if (r < 1 || r > 24) throw std::invalid_argument("update_T_rows: r must be in [1, 24]");

  const Matrix G = A * A.transpose();
  const Matrix C = D * A.transpose();
  const std::uint64_t total = 1ULL << r;

  // quad[code] = t' G t for the code's bit vector, built over a Gray walk
  std::vector<double> quad(total, 0.0);
  {
    Vector s = Vector::Zero(r);
    double val = 0.0;
    Code gray = 0;
    for (std::uint64_t u = 1; u < total; ++u) {
      int flip = std::countr_zero(u);
      gray ^= Code{1} << flip;
      if ((gray >> flip) & 1u) {
        val += G(flip, flip) + 2.0 * s[flip];
        s += G.col(flip);
      } else {
        s -= G.col(flip);
        val -= G(flip, flip) + 2.0 * s[flip];
      }
      if ((u & 0xFFFFu) == 0) {  // refresh against drift
        s.setZero();
        val = 0.0;
        for (Index a = 0; a < r; ++a)
          if ((gray >> a) & 1u) {
            val += G(a, a) + 2.0 * s[a];
            s += G.col(a);
          }
      }
      quad[gray] = val;
    }
  }

  Matrix T(m, r);
  std::vector<double> dots(total);
  for (Index i = 0; i < m; ++i) {
    dots[0] = 0.0;
    for (std::uint64_t u = 1; u < total; ++u)
      dots[u] = dots[u & (u - 1)] + C(i, std::countr_zero(u));
    std::uint64_t best = 0;
    double best_obj = 0.0;  // code 0 gives t = 0, objective constant dropped
    for (std::uint64_t u = 1; u < total; ++u) {
      double obj = quad[u] - 2.0 * dots[u];
      if (obj < best_obj) {
        best_obj = obj;
        best = u;
      }
    }
    for (Index j = 0; j < r; ++j) T(i, j) = (best >> j) & 1u ? 1.0 : 0.0;
  }
  return T;
}

namespace detail {

/// update_T_rows with the fit taken against lo + (hi - lo) * t.
inline Matrix update_T_rows_scaled(const Matrix& D, const Matrix& A,
                                   std::pair<double, double> levels) {
  if (levels.first == 0.0 && levels.second == 1.0) return update_T_rows(D, A);
  const Eigen::RowVectorXd colsum = Eigen::RowVectorXd::Ones(A.rows()) * A;
  const Matrix D_shift = D.rowwise() - levels.first * colsum;
  return update_T_rows(D_shift, (levels.second - levels.first) * A);
}

inline double fro(const Matrix& M) { return M.norm(); }

}  // namespace detail

/// Alternating exact minimization: A by least squares, T row-wise over
/// {0,1}^r. The objective is non-increasing; stops when T repeats over a
/// full sweep or after max_iter alternations. Appends
/// ||D - T A||_F^2 after every A-update to objective_trace when given.
inline FactorModel block_descent(const Matrix& D, const Matrix& T0, int max_iter,
                                 std::pair<double, double> levels = {0.0, 1.0},
                                 std::vector<double>* objective_trace = nullptr) {
  if (!is_binary(T0)) throw std::invalid_argument("block_descent: T0 must be a 0/1 matrix");
  if (T0.cols() > 24) throw std::invalid_argument("block_descent: r must be <= 24");

  Matrix T = T0;
  Matrix A = least_squares(apply_levels(T, levels), D);
  double obj = (D - apply_levels(T, levels) * A).squaredNorm();
  if (objective_trace) objective_trace->push_back(obj);
  int iters = 0;
  for (int k = 0; k < max_iter; ++k) {
    Matrix T_next = detail::update_T_rows_scaled(D, A, levels);
    if (T_next == T) break;
    T = std::move(T_next);
    A = least_squares(apply_levels(T, levels), D);
    obj = (D - apply_levels(T, levels) * A).squaredNorm();
    if (objective_trace) objective_trace->push_back(obj);
    iters = k + 1;
  }

  FactorModel model;
  model.T = std::move(T);
  model.A = std::move(A);
  model.a_constraint = AConstraint::free;
  model.binary_levels = levels;
  model.residual_fro = std::sqrt(obj);
  model.diagnostics["iterations"] = iters;
  return model;
}

namespace detail {

/// Greedy affinely (prepend_ones) or linearly independent column selection
/// from a vertex set, by pivoted QR; returns chosen column indices sorted.
inline IndexList independent_vertices(const Matrix& vertices, Index r, bool prepend_ones) {
  Matrix M;
  if (prepend_ones) {
    M.resize(vertices.rows() + 1, vertices.cols());
    M.row(0).setOnes();
    M.bottomRows(vertices.rows()) = vertices;
  } else {
    M = vertices;
  }
  auto [order, rank] = qr_pivots(M, 1e-10);
  if (rank < r)
    throw NoExactFactorization("vertex set contains no " + std::to_string(r) +
                               " independent elements");
  IndexList chosen(order.begin(), order.begin() + r);
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

inline Matrix take_columns(const Matrix& M, const IndexList& idx) {
  Matrix out(M.rows(), static_cast<Index>(idx.size()));
  for (std::size_t s = 0; s < idx.size(); ++s) out.col(static_cast<Index>(s)) = M.col(idx[s]);
  return out;
}

/// Solves [1'; T] A = [1'; D], the affine-combination system.
inline Matrix solve_affine_coefficients(const Matrix& T, const Matrix& D) {
  Matrix lhs(T.rows() + 1, T.cols());
  lhs.row(0).setOnes();
  lhs.bottomRows(T.rows()) = T;
  Matrix rhs(D.rows() + 1, D.cols());
  rhs.row(0).setOnes();
  rhs.bottomRows(D.rows()) = D;
  return least_squares(lhs, rhs);
}

inline std::uint64_t binomial_capped(Index n, Index k, std::uint64_t cap) {
  if (k < 0 || k > n) return 0;
  std::uint64_t c = 1;
  for (Index i = 0; i < k; ++i) {
    c = c * static_cast<std::uint64_t>(n - i) / static_cast<std::uint64_t>(i + 1);
    if (c > cap) return cap + 1;
  }
  return c;
}

}  // namespace detail

/// Exact factorization D = T A via vertex enumeration. Modes:
///   affine  - columns of A sum to one (vertices of aff(D))
///   linear  - unconstrained A (vertices of span(D))
///   simplex - affine plus A >= 0; unique when the vertex set has exactly
///             r elements, otherwise a bounded subset search
inline FactorModel factorize_exact(const Matrix& D, ExactMode mode, double tol_binary = 1e-8,
                                   PruningMode pruning = PruningMode::incremental) {
  const double dnorm = D.norm();
  const double resid_tol = 1e-6 * dnorm;

  FactorModel model;
  if (mode == ExactMode::linear) {
    LiftingMap lm = span_lifting(D);
    const Index r = lm.dim();
    VertexSet vs = detail::enumerate_vertices(lm, tol_binary, pruning);
    if (vs.count() < r) throw NoExactFactorization("found fewer vertices than rank");
    IndexList chosen = detail::independent_vertices(vs.vertices, r, false);
    model.T = detail::take_columns(vs.vertices, chosen);
    model.A = least_squares(model.T, D);
    model.a_constraint = AConstraint::free;
    model.diagnostics["vertex_count"] = static_cast<double>(vs.count());
  } else {
    LiftingMap lm = affine_lifting(D);
    const Index r = lm.dim() + 1;
    VertexSet vs = detail::enumerate_vertices(lm, tol_binary, pruning);
    model.diagnostics["vertex_count"] = static_cast<double>(vs.count());
    if (vs.count() < r) throw NoExactFactorization("found fewer vertices than rank");

    if (mode == ExactMode::affine) {
      IndexList chosen = detail::independent_vertices(vs.vertices, r, true);
      model.T = detail::take_columns(vs.vertices, chosen);
      model.A = detail::solve_affine_coefficients(model.T, D);
      model.a_constraint = AConstraint::affine;
    } else {  // simplex
      model.a_constraint = AConstraint::simplex;
      if (vs.count() == r) {
        model.T = vs.vertices;
        model.A = simplex_least_squares(model.T, D);
      } else {
        // rank the r-subsets by unconstrained fit, then test each against
        // the simplex constraint within a fixed budget
        const std::uint64_t enumeration_cap = 200000;
        const std::uint64_t check_budget = 1000;
        const Index q = vs.count();
        if (detail::binomial_capped(q, r, enumeration_cap) > enumeration_cap)
          throw AmbiguousSelection("simplex mode: too many vertex subsets to rank (" +
                                   std::to_string(q) + " choose " + std::to_string(r) + ")");
        std::vector<std::pair<double, IndexList>> ranked;
        IndexList subset(static_cast<std::size_t>(r));
        for (Index i = 0; i < r; ++i) subset[static_cast<std::size_t>(i)] = i;
        while (true) {
          Matrix T = detail::take_columns(vs.vertices, subset);
          Matrix A = detail::solve_affine_coefficients(T, D);
          ranked.emplace_back((D - T * A).norm(), subset);
          // next combination in lexicographic order
          Index pos = r - 1;
          while (pos >= 0 && subset[static_cast<std::size_t>(pos)] == q - r + pos) --pos;
          if (pos < 0) break;
          ++subset[static_cast<std::size_t>(pos)];
          for (Index i = pos + 1; i < r; ++i)
            subset[static_cast<std::size_t>(i)] = subset[static_cast<std::size_t>(i - 1)] + 1;
        }
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        bool found = false;
        const std::uint64_t limit = std::min<std::uint64_t>(check_budget, ranked.size());
        for (std::uint64_t s = 0; s < limit; ++s) {
          Matrix T = detail::take_columns(vs.vertices, ranked[s].second);
          Matrix A;
          try {
            A = simplex_least_squares(T, D);
          } catch (const ConvergenceFailure&) {
            continue;
          }
          if ((D - T * A).norm() <= resid_tol) {
            model.T = std::move(T);
            model.A = std::move(A);
            found = true;
            break;
          }
        }
        if (!found) {
          if (ranked.size() > check_budget)
            throw AmbiguousSelection("simplex mode: subset search budget exhausted");
          throw NoExactFactorization("no vertex subset admits a simplex-feasible exact fit");
        }
      }
    }
  }

  model.residual_fro = (D - model.T * model.A).norm();
  if (model.residual_fro > resid_tol)
    throw NoExactFactorization("best residual " + std::to_string(model.residual_fro) +
                               " exceeds tolerance");
  return model;
}

/// Exact three-way factorization D = T W A with binary T (m x r) and binary
/// right factor; A is stored as the r x n transpose of the binary factor.
inline FactorModel factorize_three_way(const Matrix& D, Index r, double tol_binary = 1e-8,
                                       PruningMode pruning = PruningMode::incremental) {
  VertexSet vsT = find_vertices_span(D, r, tol_binary, pruning);
  VertexSet vsA = find_vertices_span(D.transpose(), r, tol_binary, pruning);
  if (vsT.count() < r || vsA.count() < r)
    throw NoExactFactorization("three-way: not enough span vertices on one side");
  Matrix T = detail::take_columns(vsT.vertices, detail::independent_vertices(vsT.vertices, r, false));
  Matrix Araw = detail::take_columns(vsA.vertices, detail::independent_vertices(vsA.vertices, r, false));

  // W = (T'T)^{-1} T' D A (A'A)^{-1}
  Matrix lhs = (T.transpose() * T).partialPivLu().solve(T.transpose() * D * Araw);
  Matrix W = (Araw.transpose() * Araw).partialPivLu().solve(lhs.transpose()).transpose();

  FactorModel model;
  model.T = std::move(T);
  model.A = Araw.transpose();
  model.W = std::move(W);
  model.a_constraint = AConstraint::free;
  model.residual_fro = (D - model.T * (*model.W) * model.A).norm();
  model.diagnostics["vertex_count"] = static_cast<double>(vsT.count());
  model.diagnostics["vertex_count_right"] = static_cast<double>(vsA.count());
  if (model.residual_fro > 1e-6 * D.norm())
    throw NoExactFactorization("three-way: residual " + std::to_string(model.residual_fro) +
                               " exceeds tolerance");
  return model;
}

namespace detail {

/// Anchor rows for the approximate path: deterministic max-volume rows by
/// pivoted QR of the basis transpose, or a seeded random subset with a
/// condition-number guard.
inline IndexList approx_anchor_rows(const Matrix& basis, std::optional<std::uint64_t> row_seed) {
  const Index m = basis.rows(), k = basis.cols();
  const double cond_cap = 1e8;
  auto condition_of = [&](const IndexList& rows) {
    Matrix sub(k, k);
    for (Index i = 0; i < k; ++i) sub.row(i) = basis.row(rows[static_cast<std::size_t>(i)]);
    Eigen::JacobiSVD<Matrix> svd(sub);
    double smin = svd.singularValues().minCoeff();
    return smin <= 0.0 ? std::numeric_limits<double>::infinity()
                       : svd.singularValues().maxCoeff() / smin;
  };

  if (!row_seed) {
    auto [order, rank] = qr_pivots(basis.transpose(), 1e-14);
    if (rank < k) throw DegenerateRows("no invertible anchor-row subset found");
    IndexList rows(order.begin(), order.begin() + k);
    std::sort(rows.begin(), rows.end());
    if (condition_of(rows) > cond_cap)
      throw DegenerateRows("anchor-row block is too ill-conditioned");
    return rows;
  }

  Rng rng(*row_seed);
  for (int attempt = 0; attempt < 50; ++attempt) {
    IndexList rows = rng.sample_without_replacement(m, k);
    std::sort(rows.begin(), rows.end());
    if (condition_of(rows) <= cond_cap) return rows;
  }
  throw DegenerateRows("no well-conditioned anchor-row subset within retry budget");
}

inline std::vector<std::uint64_t> column_bits(const Vector& col, double threshold) {
  std::vector<std::uint64_t> bits((static_cast<std::size_t>(col.size()) + 63) / 64, 0);
  for (Index i = 0; i < col.size(); ++i)
    if (col[i] > threshold) bits[static_cast<std::size_t>(i) / 64] |= 1ULL << (i % 64);
  return bits;
}

}  // namespace detail

/// One run of the approximate vertex search: project onto the dominant
/// r-1 dimensional affine subspace, lift all 2^(r-1) codes and keep the r
/// distinct rounded columns with the smallest rounding distances.
/// Without a row_seed the anchor rows are the deterministic max-volume
/// choice; with one they are drawn at random (used for restarts).
inline Matrix find_vertices_approximate(const Matrix& D, Index r,
                                        std::optional<std::uint64_t> row_seed = std::nullopt,
                                        std::pair<double, double> levels = {0.0, 1.0}) {
  const Index m = D.rows(), n = D.cols();
  if (r < 2) throw std::invalid_argument("find_vertices_approximate: r must be >= 2");
  if (r - 1 > std::min(m, n))
    throw DimensionMismatch("find_vertices_approximate: r - 1 exceeds min(m, n)");
  if (r - 1 > 24)
    throw CandidateOverflow("find_vertices_approximate: r - 1 > 24 not supported");
  const double lo = levels.first, hi = levels.second;
  if (!(lo < hi)) throw std::invalid_argument("find_vertices_approximate: invalid levels");

  const Vector p = D.rowwise().mean();
  const Matrix P = D.colwise() - p;
  const Matrix basis = truncated_svd(P, r - 1).basis;
  const IndexList anchors = detail::approx_anchor_rows(basis, row_seed);
  const LiftingMap lm = make_lifting(basis, anchors, p, HullMode::affine);

  // rounding distance of every candidate, over a Gray-code walk
  const Index k = r - 1;
  const double mid = 0.5 * (lo + hi);
  const std::uint64_t total = 1ULL << k;
  std::vector<double> delta(total);
  {
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
      double d2 = 0.0;
      for (Index i = 0; i < m; ++i) {
        double target = t[i] > mid ? hi : lo;
        double diff = t[i] - target;
        d2 += diff * diff;
      }
      delta[gray] = d2;
    }
  }

  std::vector<Code> order(total);
  for (std::uint64_t u = 0; u < total; ++u) order[u] = static_cast<Code>(u);
  std::stable_sort(order.begin(), order.end(), [&](Code a, Code b) {
    if (delta[a] != delta[b]) return delta[a] < delta[b];
    return a < b;
  });

  Matrix T(m, r);
  std::set<std::vector<std::uint64_t>> seen;
  Index kept = 0;
  for (Code code : order) {
    Vector t = lm.lift(code);
    auto bits = detail::column_bits(t, mid);
    if (!seen.insert(bits).second) continue;
    for (Index i = 0; i < m; ++i) T(i, kept) = t[i] > mid ? 1.0 : 0.0;
    if (++kept == r) break;
  }
  if (kept < r)
    throw DegenerateRows("candidate pool exhausted before finding r distinct columns");
  return T;
}

/// Approximate factorization: restarted approximate vertex search, a
/// refinement rule, the requested constraint on A, and an optional block
/// descent polish.
inline FactorModel factorize_approximate(const Matrix& D, const ApproxConfig& cfg) {
  if (cfg.restarts < 1) throw std::invalid_argument("factorize_approximate: restarts must be >= 1");
  if (cfg.polish_block_iters < 0)
    throw std::invalid_argument("factorize_approximate: negative polish iterations");
  if (!(cfg.binary_levels.first < cfg.binary_levels.second))
    throw std::invalid_argument("factorize_approximate: binary levels must satisfy lo < hi");
  if (cfg.a_constraint == AConstraint::affine)
    throw std::invalid_argument("factorize_approximate: affine A-constraint is not supported");

  auto fit_A = [&](const Matrix& T) {
    Matrix scaled = apply_levels(T, cfg.binary_levels);
    Matrix A = cfg.a_constraint == AConstraint::simplex ? simplex_least_squares(scaled, D)
                                                        : least_squares(scaled, D);
    double resid = (D - scaled * A).norm();
    return std::make_pair(std::move(A), resid);
  };

  const int s_eff = cfg.refine == Refinement::none ? 1 : cfg.restarts;
  std::vector<Matrix> candidates;
  candidates.reserve(static_cast<std::size_t>(s_eff));
  for (int l = 1; l <= s_eff; ++l) {
    std::optional<std::uint64_t> row_seed;
    if (l > 1) row_seed = substream_seed(cfg.seed, static_cast<std::uint64_t>(l));
    candidates.push_back(find_vertices_approximate(D, cfg.r, row_seed, cfg.binary_levels));
  }

  Matrix T;
  double pool_size = cfg.r;
  if (cfg.refine == Refinement::backward_elim && s_eff > 1) {
    // merge distinct columns across restarts, then greedily drop the column
    // whose removal increases the unconstrained fit least
    std::vector<Vector> pool;
    std::set<std::vector<std::uint64_t>> seen;
    for (const Matrix& cand : candidates)
      for (Index j = 0; j < cand.cols(); ++j) {
        auto bits = detail::column_bits(cand.col(j), 0.5);
        if (seen.insert(bits).second) pool.push_back(cand.col(j));
      }
    std::sort(pool.begin(), pool.end(), [](const Vector& a, const Vector& b) {
      return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                          b.data() + b.size());
    });
    pool_size = static_cast<double>(pool.size());
    auto pool_matrix = [&](std::size_t skip) {
      Matrix M(D.rows(), static_cast<Index>(pool.size() - (skip < pool.size() ? 1 : 0)));
      Index out = 0;
      for (std::size_t s = 0; s < pool.size(); ++s) {
        if (s == skip) continue;
        M.col(out++) = pool[s];
      }
      return M;
    };
    while (static_cast<Index>(pool.size()) > cfg.r) {
      std::size_t drop = 0;
      double best_resid = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < pool.size(); ++s) {
        Matrix M = pool_matrix(s);
        Matrix scaled = apply_levels(M, cfg.binary_levels);
        double resid = (D - scaled * least_squares(scaled, D)).norm();
        if (resid <= best_resid) {  // ties drop the lexicographically larger column
          best_resid = resid;
          drop = s;
        }
      }
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(drop));
    }
    T.resize(D.rows(), cfg.r);
    for (Index j = 0; j < cfg.r; ++j) T.col(j) = pool[static_cast<std::size_t>(j)];
  } else {
    std::size_t best = 0;
    double best_resid = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < candidates.size(); ++l) {
      Matrix scaled = apply_levels(candidates[l], cfg.binary_levels);
      double resid = (D - scaled * least_squares(scaled, D)).norm();
      if (resid < best_resid) {
        best_resid = resid;
        best = l;
      }
    }
    T = candidates[best];
  }

  double polish_iters = 0.0;
  if (cfg.polish_block_iters > 0) {
    FactorModel polished = block_descent(D, T, cfg.polish_block_iters, cfg.binary_levels);
    T = polished.T;
    polish_iters = polished.diagnostics.at("iterations");
  }

  auto [A, resid] = fit_A(T);
  FactorModel model;
  model.T = std::move(T);
  model.A = std::move(A);
  model.a_constraint = cfg.a_constraint;
  model.binary_levels = cfg.binary_levels;
  model.residual_fro = resid;
  model.diagnostics["restarts"] = static_cast<double>(s_eff);
  model.diagnostics["vertex_count"] = pool_size;
  model.diagnostics["iterations"] = polish_iters;
  return model;
}

}  // namespace bincomp
