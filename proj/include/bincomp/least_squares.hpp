#pragma once

#include "bincomp/common.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace bincomp {

/// argmin_A ||D - T A||_F. Uses column-pivoted QR when T has full column
/// rank and falls back to the minimum-norm SVD solution otherwise.
inline Matrix least_squares(const Matrix& T, const Matrix& D) {
  if (T.rows() != D.rows()) throw DimensionMismatch("least_squares: row counts differ");
  Eigen::ColPivHouseholderQR<Matrix> qr(T);
  qr.setThreshold(1e-12);
  if (qr.rank() == T.cols()) return qr.solve(D);
  Eigen::BDCSVD<Matrix> svd(T, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.solve(D);
}

/// Euclidean projection onto the probability simplex {x >= 0, sum x = 1}.
inline Vector project_to_simplex(const Vector& y) {
  const Index n = y.size();
  std::vector<double> u(y.data(), y.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0, tau = 0.0;
  for (Index j = 0; j < n; ++j) {
    cumsum += u[static_cast<std::size_t>(j)];
    double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - t > 0.0) tau = t;
  }
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[i] = std::max(y[i] - tau, 0.0);
  return x;
}

/// Euclidean projection onto {x : 0 <= x_i <= cap, sum x = 1}, by bisection
/// on the shift tau in x_i = clamp(y_i - tau, 0, cap). Requires n*cap >= 1.
inline Vector project_to_capped_simplex(const Vector& y, double cap) {
  const Index n = y.size();
  if (static_cast<double>(n) * cap < 1.0)
    throw std::invalid_argument("project_to_capped_simplex: infeasible cap");
  auto mass = [&](double tau) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += std::clamp(y[i] - tau, 0.0, cap);
    return s;
  };
  double lo = y.minCoeff() - cap, hi = y.maxCoeff();
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
    double mid = 0.5 * (lo + hi);
    if (mass(mid) > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  double tau = 0.5 * (lo + hi);
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[i] = std::clamp(y[i] - tau, 0.0, cap);
  return x;
}

namespace detail {

/// KKT residual for min 0.5||Ta - d||^2 over the simplex, with gradient g:
/// on the support g_i must equal the multiplier, off it g_i must not be
/// smaller. Returns the largest violation.
inline double simplex_kkt_residual(const Vector& x, const Vector& g) {
  double mu = 0.0;
  int support = 0;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] > 1e-12) {
      mu += g[i];
      ++support;
    }
  }
  if (support == 0) return std::numeric_limits<double>::infinity();
  mu /= support;
  double viol = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] > 1e-12)
      viol = std::max(viol, std::abs(g[i] - mu));
    else
      viol = std::max(viol, std::max(0.0, mu - g[i]));
  }
  return viol;
}

}  // namespace detail

/// Column-wise argmin_A ||D - T A||_F subject to each column of A lying on
/// the probability simplex. Accelerated projected gradient with an exact
/// projection; iterates are tracked so the returned point is the best seen.
inline Matrix simplex_least_squares(const Matrix& T, const Matrix& D, double kkt_tol = 1e-6,
                                    int max_iter = 10000) {
  if (T.rows() != D.rows()) throw DimensionMismatch("simplex_least_squares: row counts differ");
  const Index r = T.cols(), n = D.cols();
  if (r < 1) throw std::invalid_argument("simplex_least_squares: r must be >= 1");

  const Matrix G = T.transpose() * T;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
  const double L = std::max(eig.eigenvalues().maxCoeff(), 1e-30);
  const Matrix C = T.transpose() * D;  // column j = T' d_j
  const Matrix warm = least_squares(T, D);

  Matrix A(r, n);
  for (Index j = 0; j < n; ++j) {
    const Vector c = C.col(j);
    auto objective = [&](const Vector& a) { return 0.5 * a.dot(G * a) - c.dot(a); };
    auto kkt_ok = [&](const Vector& a) {
      Vector g = G * a - c;
      return detail::simplex_kkt_residual(a, g) <= kkt_tol * std::max(1.0, g.cwiseAbs().maxCoeff());
    };

    // warm start at the projected unconstrained solution; tracking the best
    // iterate keeps the final objective at or below the starting one
    Vector x = project_to_simplex(warm.col(j));
    Vector best = x;
    double best_obj = objective(x);
    Vector y = x;
    double t = 1.0;
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
      if (kkt_ok(best)) {
        converged = true;
        break;
      }
      Vector gy = G * y - c;
      Vector x_next = project_to_simplex(y - gy / L);
      double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = x_next + ((t - 1.0) / t_next) * (x_next - x);
      x = x_next;
      t = t_next;
      double obj = objective(x);
      if (obj < best_obj) {
        best_obj = obj;
        best = x;
      }
    }
    if (!converged && !kkt_ok(best))
      throw ConvergenceFailure("simplex_least_squares: KKT tolerance not reached in " +
                               std::to_string(max_iter) + " iterations (column " +
                               std::to_string(j) + ")");
    A.col(j) = best;
  }
  return A;
}

}  // namespace bincomp
