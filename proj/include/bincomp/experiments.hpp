#pragma once

#include "bincomp/assignment.hpp"
#include "bincomp/common.hpp"
#include "bincomp/factorize.hpp"
#include "bincomp/least_squares.hpp"
#include "bincomp/matrix_io.hpp"
#include "bincomp/parallel.hpp"
#include "bincomp/rng.hpp"
#include "bincomp/vertex_enum.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace bincomp {

enum class SetupKind { T05, TsparseDense, T05Adense, Separable };

inline std::string to_string(SetupKind s) {
  switch (s) {
    case SetupKind::T05: return "T05";
    case SetupKind::TsparseDense: return "TsparseDense";
    case SetupKind::T05Adense: return "T05Adense";
    case SetupKind::Separable: return "Separable";
  }
  return "?";
}

struct ExperimentConfig {
  SetupKind setup = SetupKind::T05;
  Index m = 1000;
  Index r = 10;
  Index n = 20;
  double noise_alpha = 0.0;
  double bernoulli_p = 0.5;
  int trials = 20;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  Matrix D;
  Matrix T_star;
  Matrix A_star;
};

/// D = T* A* + alpha E. T* depends on the setup; the columns of A* are
/// uniform on the probability simplex (capped at 2/r entrywise for
/// T05Adense); E is i.i.d. standard Gaussian and omitted when alpha = 0.
inline SyntheticData gen_synthetic(const ExperimentConfig& cfg, int trial = 0) {
  if (cfg.m < 1 || cfg.r < 1 || cfg.n < 1)
    throw std::invalid_argument("gen_synthetic: dimensions must be positive");
  if (cfg.setup == SetupKind::Separable && cfg.m < cfg.r)
    throw std::invalid_argument("gen_synthetic: separable setup needs m >= r");
  Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(trial));

  SyntheticData data;
  switch (cfg.setup) {
    case SetupKind::T05:
    case SetupKind::T05Adense:
      data.T_star = rng.bernoulli_matrix(cfg.m, cfg.r, cfg.bernoulli_p);
      break;
    case SetupKind::TsparseDense: {
      data.T_star.resize(cfg.m, cfg.r);
      const Index sparse_cols = (cfg.r + 1) / 2;
      for (Index j = 0; j < cfg.r; ++j) {
        double p = j < sparse_cols ? 0.1 : 0.9;
        for (Index i = 0; i < cfg.m; ++i) data.T_star(i, j) = rng.bernoulli(p) ? 1.0 : 0.0;
      }
      break;
    }
    case SetupKind::Separable: {
      Matrix stacked(cfg.m, cfg.r);
      stacked.topRows(cfg.m - cfg.r) = rng.bernoulli_matrix(cfg.m - cfg.r, cfg.r, cfg.bernoulli_p);
      stacked.bottomRows(cfg.r) = Matrix::Identity(cfg.r, cfg.r);
      IndexList perm = rng.permutation(cfg.m);
      data.T_star.resize(cfg.m, cfg.r);
      for (Index i = 0; i < cfg.m; ++i)
        data.T_star.row(perm[static_cast<std::size_t>(i)]) = stacked.row(i);
      break;
    }
  }

  data.A_star.resize(cfg.r, cfg.n);
  for (Index j = 0; j < cfg.n; ++j) {
    Vector col = rng.simplex(cfg.r);
    if (cfg.setup == SetupKind::T05Adense) col = project_to_capped_simplex(col, 2.0 / cfg.r);
    data.A_star.col(j) = col;
  }

  data.D = data.T_star * data.A_star;
  if (cfg.noise_alpha > 0.0) data.D += cfg.noise_alpha * rng.gaussian_matrix(cfg.m, cfg.n);
  return data;
}

struct ScoreReport {
  double hamming_norm = 0.0;  // min over column permutations of ||T*-T Pi||_F^2/(m r)
  double hamming_raw = 0.0;   // same metric without alignment
  double rmse_signal = 0.0;   // ||T* A* - T A||_F / sqrt(m n)
  double rmse_fit = 0.0;      // ||T A - D||_F / sqrt(m n)
  IndexList permutation;      // permutation[k] = column of T matched to T*'s column k
};

/// Aligns columns by minimum-cost assignment on Hamming distances, then
/// reports the evaluation metrics.
inline ScoreReport align_and_score(const Matrix& T_star, const Matrix& A_star, const Matrix& T,
                                   const Matrix& A, const Matrix& D) {
  if (T_star.rows() != T.rows() || T_star.cols() != T.cols())
    throw DimensionMismatch("align_and_score: T shapes differ");
  const Index m = T.rows(), r = T.cols();
  const double mn = static_cast<double>(D.rows()) * static_cast<double>(D.cols());

  Matrix cost(r, r);
  for (Index k = 0; k < r; ++k)
    for (Index l = 0; l < r; ++l) cost(k, l) = (T_star.col(k) - T.col(l)).squaredNorm();
  ScoreReport score;
  score.permutation = solve_assignment(cost);
  double total = 0.0;
  for (Index k = 0; k < r; ++k) total += cost(k, score.permutation[static_cast<std::size_t>(k)]);
  score.hamming_norm = total / (static_cast<double>(m) * static_cast<double>(r));
  score.hamming_raw = (T_star - T).squaredNorm() / (static_cast<double>(m) * static_cast<double>(r));
  score.rmse_signal = (T_star * A_star - T * A).norm() / std::sqrt(mn);
  score.rmse_fit = (T * A - D).norm() / std::sqrt(mn);
  return score;
}

/// The oracle baseline: the optimal binary T given the true mixing matrix.
inline Matrix oracle_solve(const Matrix& D, const Matrix& A_star) {
  return update_T_rows(D, A_star);
}

/// Block scheme with the integrality of T relaxed to the box [0,1]:
/// alternating least squares for A and projected gradient rows for T, best
/// restart kept, T rounded at 1/2 and A refit. Appends the objective after
/// every half-step of the winning restart's trajectory when a trace is given.
inline FactorModel box_baseline(const Matrix& D, Index r, int restarts, std::uint64_t seed,
                                std::vector<double>* objective_trace = nullptr) {
  if (restarts < 1) throw std::invalid_argument("box_baseline: restarts must be >= 1");
  const Index m = D.rows();
  const int max_outer = 200, max_inner = 40;

  Matrix best_T;
  double best_obj = std::numeric_limits<double>::infinity();
  double total_iters = 0.0;
  std::vector<double> best_trace;

  for (int l = 0; l < restarts; ++l) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(l));
    Matrix T(m, r);
    for (Index j = 0; j < r; ++j)
      for (Index i = 0; i < m; ++i) T(i, j) = rng.uniform();

    std::vector<double> trace;
    double obj = std::numeric_limits<double>::infinity();
    Matrix A;
    for (int outer = 0; outer < max_outer; ++outer) {
      A = least_squares(T, D);
      double after_A = (D - T * A).squaredNorm();
      trace.push_back(after_A);

      const Matrix G = A * A.transpose();
      const Matrix C = D * A.transpose();
      Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
      const double L = std::max(eig.eigenvalues().maxCoeff(), 1e-30);
      for (Index i = 0; i < m; ++i) {
        Vector t = T.row(i);
        for (int inner = 0; inner < max_inner; ++inner) {
          Vector g = G * t - C.row(i).transpose();
          Vector tn = (t - g / L).cwiseMax(0.0).cwiseMin(1.0);
          double step = (tn - t).cwiseAbs().maxCoeff();
          t = tn;
          if (step < 1e-12) break;
        }
        T.row(i) = t;
      }
      double after_T = (D - T * A).squaredNorm();
      trace.push_back(after_T);
      if (!std::isfinite(after_T)) throw ConvergenceFailure("box_baseline: objective is not finite");
      total_iters += 1.0;
      if (std::isfinite(obj) && obj - after_T <= 1e-9 * std::max(1.0, obj)) {
        obj = after_T;
        break;
      }
      obj = after_T;
    }
    if (obj < best_obj) {
      best_obj = obj;
      best_T = T;
      best_trace = std::move(trace);
    }
  }

  Matrix T_binary = (best_T.array() > 0.5).cast<double>().matrix();
  FactorModel model;
  model.T = std::move(T_binary);
  model.A = least_squares(model.T, D);
  model.a_constraint = AConstraint::free;
  model.residual_fro = (D - model.T * model.A).norm();
  model.diagnostics["restarts"] = static_cast<double>(restarts);
  model.diagnostics["iterations"] = total_iters;
  if (objective_trace) *objective_trace = std::move(best_trace);
  return model;
}

enum class SweepMethod { findvertices, oracle, box };

inline std::string to_string(SweepMethod m) {
  switch (m) {
    case SweepMethod::findvertices: return "findvertices";
    case SweepMethod::oracle: return "oracle";
    case SweepMethod::box: return "box";
  }
  return "?";
}

/// Method configuration for the sweep harness. Backward elimination over
/// the merged restart pool is the default here: best-fit restarts rarely
/// beat the deterministic max-volume restart, while the merged pool keeps
/// the true columns in play at higher noise.
struct SweepOptions {
  int restarts = 5;
  Refinement refine = Refinement::backward_elim;
  int polish_block_iters = 20;
  int box_restarts = 5;
};

struct SweepRow {
  std::string setup;
  double alpha = 0.0;
  int trial = 0;
  std::string method;
  ScoreReport score;
  bool failed = false;
  std::string error;
};

inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "setup,alpha,trial,method,hamming,hamming_raw,rmse_signal,rmse_fit,status\n";
  for (const auto& row : rows) {
    out << row.setup << ',' << format_value(row.alpha) << ',' << row.trial << ',' << row.method
        << ',';
    if (row.failed) {
      out << ",,,,failed\n";
    } else {
      out << format_value(row.score.hamming_norm) << ',' << format_value(row.score.hamming_raw)
          << ',' << format_value(row.score.rmse_signal) << ',' << format_value(row.score.rmse_fit)
          << ",ok\n";
    }
  }
}

/// Runs every (grid cell, trial, method) combination; trials execute in
/// parallel and rows come back in deterministic (cell, trial, method) order.
/// Per-trial failures are recorded as marker rows, not thrown.
inline std::vector<SweepRow> run_noise_sweep(const std::vector<ExperimentConfig>& grid,
                                             const std::vector<SweepMethod>& methods,
                                             const SweepOptions& opts = {},
                                             std::ostream* csv = nullptr) {
  struct Task {
    std::size_t cell;
    int trial;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < grid.size(); ++c)
    for (int t = 0; t < grid[c].trials; ++t) tasks.push_back({c, t});

  std::vector<std::vector<SweepRow>> slots(tasks.size());
  parallel_for(static_cast<Index>(tasks.size()), [&](Index ti) {
    const Task& task = tasks[static_cast<std::size_t>(ti)];
    const ExperimentConfig& cfg = grid[task.cell];
    auto& out = slots[static_cast<std::size_t>(ti)];
    SyntheticData data = gen_synthetic(cfg, task.trial);
    for (SweepMethod method : methods) {
      SweepRow row;
      row.setup = to_string(cfg.setup);
      row.alpha = cfg.noise_alpha;
      row.trial = task.trial;
      row.method = to_string(method);
      try {
        Matrix T, A;
        switch (method) {
          case SweepMethod::findvertices: {
            ApproxConfig acfg;
            acfg.r = cfg.r;
            acfg.restarts = opts.restarts;
            acfg.refine = opts.refine;
            acfg.polish_block_iters = opts.polish_block_iters;
            acfg.seed = substream_seed(cfg.seed, (1ULL << 32) + static_cast<std::uint64_t>(task.trial));
            FactorModel model = factorize_approximate(data.D, acfg);
            T = model.T;
            A = model.A;
            break;
          }
          case SweepMethod::oracle: {
            T = oracle_solve(data.D, data.A_star);
            A = data.A_star;
            break;
          }
          case SweepMethod::box: {
            FactorModel model = box_baseline(
                data.D, cfg.r, opts.box_restarts,
                substream_seed(cfg.seed, (2ULL << 32) + static_cast<std::uint64_t>(task.trial)));
            T = model.T;
            A = model.A;
            break;
          }
        }
        row.score = align_and_score(data.T_star, data.A_star, T, A, data.D);
      } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
      }
      out.push_back(std::move(row));
    }
  });

  std::vector<SweepRow> rows;
  for (auto& slot : slots)
    for (auto& row : slot) rows.push_back(std::move(row));
  if (csv) write_sweep_csv(rows, *csv);
  return rows;
}

struct VertexCountCell {
  Index r = 0;
  double p = 0.0;
  Index max_count = 0;
  bool overflow = false;
};

/// Maximum number of hypercube vertices in aff(T) over random Bernoulli(p)
/// draws of T, per (r, p) cell.
inline std::vector<VertexCountCell> vertex_count_study(Index m, const std::vector<Index>& r_list,
                                                       const std::vector<double>& p_grid,
                                                       int trials, std::uint64_t seed,
                                                       std::ostream* csv = nullptr) {
  struct Task {
    std::size_t cell;
    int trial;
  };
  const std::size_t cells = r_list.size() * p_grid.size();
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells; ++c)
    for (int t = 0; t < trials; ++t) tasks.push_back({c, t});

  std::vector<Index> counts(tasks.size(), 0);
  std::vector<char> overflow(tasks.size(), 0);
  parallel_for(static_cast<Index>(tasks.size()), [&](Index ti) {
    const Task& task = tasks[static_cast<std::size_t>(ti)];
    const Index r = r_list[task.cell / p_grid.size()];
    const double p = p_grid[task.cell % p_grid.size()];
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(ti));
    Matrix T = rng.bernoulli_matrix(m, r, p);
    try {
      counts[static_cast<std::size_t>(ti)] = find_vertices_affine(T).count();
    } catch (const CandidateOverflow&) {
      overflow[static_cast<std::size_t>(ti)] = 1;
    }
  });

  std::vector<VertexCountCell> table(cells);
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    auto& cell = table[tasks[t].cell];
    cell.r = r_list[tasks[t].cell / p_grid.size()];
    cell.p = p_grid[tasks[t].cell % p_grid.size()];
    cell.max_count = std::max(cell.max_count, counts[t]);
    cell.overflow = cell.overflow || overflow[t];
  }
  if (csv) {
    *csv << "r,p,max_vertices,status\n";
    for (const auto& cell : table)
      *csv << cell.r << ',' << format_value(cell.p) << ',' << cell.max_count << ','
           << (cell.overflow ? "overflow" : "ok") << '\n';
  }
  return table;
}

struct RankSweepRow {
  Index r = 0;
  double rmse_fit = 0.0;
  bool failed = false;
  std::string error;
};

/// RMSE of the approximate factorization as a function of the rank.
inline std::vector<RankSweepRow> rank_sweep(const Matrix& D, Index r_min, Index r_max,
                                            const ApproxConfig& base, std::ostream* csv = nullptr) {
  if (r_min < 2 || r_max < r_min) throw std::invalid_argument("rank_sweep: need 2 <= r_min <= r_max");
  const double mn = static_cast<double>(D.rows()) * static_cast<double>(D.cols());
  std::vector<RankSweepRow> rows(static_cast<std::size_t>(r_max - r_min + 1));
  parallel_for(static_cast<Index>(rows.size()), [&](Index idx) {
    RankSweepRow& row = rows[static_cast<std::size_t>(idx)];
    row.r = r_min + idx;
    try {
      ApproxConfig cfg = base;
      cfg.r = row.r;
      FactorModel model = factorize_approximate(D, cfg);
      row.rmse_fit = model.residual_fro / std::sqrt(mn);
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  });
  if (csv) {
    *csv << "r,rmse_fit,status\n";
    for (const auto& row : rows) {
      *csv << row.r << ',';
      if (row.failed)
        *csv << ",failed\n";
      else
        *csv << format_value(row.rmse_fit) << ",ok\n";
    }
  }
  return rows;
}

}  // namespace bincomp
