// bincomp command-line front end: matrix I/O, vertex enumeration,
// factorization drivers and the benchmark harnesses.

#include "bincomp/bincomp.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace bincomp;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string eigen_version() {
  std::ostringstream os;
  os << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  return os.str();
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

Index parse_rank(const std::string& s) {
  if (s == "auto") return kAutoRank;
  try {
    std::size_t pos = 0;
    long value = std::stol(s, &pos);
    if (pos == s.size() && value >= 1) return static_cast<Index>(value);
  } catch (const std::exception&) {
  }
  throw CLI::ValidationError("--rank", "expected 'auto' or a positive integer");
}

std::pair<double, double> parse_levels(const std::string& s) {
  std::istringstream is(s);
  double lo, hi;
  char comma;
  if (!(is >> lo >> comma >> hi) || comma != ',' || !(lo < hi))
    throw CLI::ValidationError("--levels", "expected lo,hi with lo < hi");
  return {lo, hi};
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream is(s);
  std::string tok;
  try {
    while (std::getline(is, tok, ',')) out.push_back(std::stod(tok));
  } catch (const std::exception&) {
    throw CLI::ValidationError("list", "cannot parse '" + tok + "' as a number");
  }
  if (out.empty()) throw CLI::ValidationError("list", "expected comma-separated numbers");
  return out;
}

PruningMode parse_pruning(const std::string& s) {
  if (s == "full") return PruningMode::full;
  if (s == "incremental") return PruningMode::incremental;
  if (s == "ilp") return PruningMode::ilp;
  throw CLI::ValidationError("--pruning", "expected full|incremental|ilp");
}

Refinement parse_refine(const std::string& s) {
  if (s == "none") return Refinement::none;
  if (s == "best-fit") return Refinement::best_fit;
  if (s == "backward-elim") return Refinement::backward_elim;
  throw CLI::ValidationError("--refine", "expected none|best-fit|backward-elim");
}

SetupKind parse_setup(const std::string& s) {
  if (s == "t05") return SetupKind::T05;
  if (s == "tsparse-dense") return SetupKind::TsparseDense;
  if (s == "t05-adense") return SetupKind::T05Adense;
  if (s == "separable") return SetupKind::Separable;
  throw CLI::ValidationError("--setup", "expected t05|tsparse-dense|t05-adense|separable");
}

TableFormat parse_format(const std::string& s, const std::string& path) {
  if (s == "csv") return TableFormat::csv;
  if (s == "tsv") return TableFormat::tsv;
  return format_from_path(path);  // "auto"
}

std::string out_path(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

RunManifest base_manifest(const std::string& command) {
  RunManifest m;
  m.command = command;
  m.versions["bincomp"] = kVersion;
  m.versions["eigen"] = eigen_version();
  return m;
}

// ---------------------------------------------------------------- find-vertices

struct FindVerticesArgs {
  std::string input, mode = "affine", rank = "auto", pruning = "incremental";
  std::string format = "auto", out_dir = ".";
  double tol = 1e-8;
};

int run_find_vertices(const FindVerticesArgs& args) {
  Timer timer;
  Matrix D = read_matrix(args.input, parse_format(args.format, args.input));
  Index r = parse_rank(args.rank);
  PruningMode pruning = parse_pruning(args.pruning);
  VertexSet vs;
  if (args.mode == "affine")
    vs = find_vertices_affine(D, r, args.tol, pruning);
  else if (args.mode == "span")
    vs = find_vertices_span(D, r, args.tol, pruning);
  else
    throw CLI::ValidationError("--mode", "expected affine|span");

  std::string vertices_path = out_path(args.out_dir, "vertices.csv");
  write_matrix(vs.vertices.transpose(), vertices_path);  // one vertex per row

  RunManifest m = base_manifest("find-vertices");
  m.inputs = {args.input};
  m.outputs = {vertices_path};
  m.config = {{"mode", args.mode},         {"rank", args.rank},
              {"tol", format_value(args.tol)}, {"pruning", args.pruning},
              {"vertices_found", std::to_string(vs.count())}};
  m.timings_seconds["total"] = timer.seconds();
  write_manifest(m, out_path(args.out_dir, "manifest.json"));
  return 0;
}

// ---------------------------------------------------------------- factorize

struct FactorizeArgs {
  std::string input, mode = "exact-affine", rank = "auto", pruning = "incremental";
  std::string refine = "best-fit", a_constraint = "free", levels = "0,1";
  std::string format = "auto", out_dir = ".";
  double tol = 1e-8;
  int restarts = 1, polish_iters = 0;
  std::uint64_t seed = 0;
};

int run_factorize(const FactorizeArgs& args) {
  Timer timer;
  Matrix D = read_matrix(args.input, parse_format(args.format, args.input));
  Index r = parse_rank(args.rank);
  PruningMode pruning = parse_pruning(args.pruning);

  FactorModel model;
  if (args.mode == "exact-affine") {
    model = factorize_exact(D, ExactMode::affine, args.tol, pruning);
  } else if (args.mode == "exact-linear") {
    model = factorize_exact(D, ExactMode::linear, args.tol, pruning);
  } else if (args.mode == "exact-simplex") {
    model = factorize_exact(D, ExactMode::simplex, args.tol, pruning);
  } else if (args.mode == "three-way") {
    if (r == kAutoRank) throw CLI::ValidationError("--rank", "three-way mode needs an explicit rank");
    model = factorize_three_way(D, r, args.tol, pruning);
  } else if (args.mode == "approx") {
    if (r == kAutoRank) throw CLI::ValidationError("--rank", "approx mode needs an explicit rank");
    ApproxConfig cfg;
    cfg.r = r;
    cfg.restarts = args.restarts;
    cfg.refine = parse_refine(args.refine);
    cfg.polish_block_iters = args.polish_iters;
    cfg.binary_levels = parse_levels(args.levels);
    cfg.a_constraint = args.a_constraint == "simplex" ? AConstraint::simplex : AConstraint::free;
    cfg.seed = args.seed;
    model = factorize_approximate(D, cfg);
  } else {
    throw CLI::ValidationError("--mode", "expected exact-affine|exact-linear|exact-simplex|three-way|approx");
  }

  std::vector<std::string> outputs;
  std::string t_path = out_path(args.out_dir, "T.csv");
  write_matrix(model.T, t_path);
  outputs.push_back(t_path);
  std::string a_path = out_path(args.out_dir, "A.csv");
  write_matrix(model.A, a_path);
  outputs.push_back(a_path);
  if (model.W) {
    std::string w_path = out_path(args.out_dir, "W.csv");
    write_matrix(*model.W, w_path);
    outputs.push_back(w_path);
  }

  nlohmann::json metrics{{"residual_fro", model.residual_fro},
                         {"rank", model.T.cols()},
                         {"rows", model.T.rows()},
                         {"columns", model.A.cols()},
                         {"binary_levels", {model.binary_levels.first, model.binary_levels.second}},
                         {"diagnostics", model.diagnostics}};
  std::string metrics_path = out_path(args.out_dir, "metrics.json");
  {
    std::ofstream out(metrics_path);
    out << metrics.dump(2) << '\n';
  }
  outputs.push_back(metrics_path);

  RunManifest m = base_manifest("factorize");
  m.inputs = {args.input};
  m.outputs = outputs;
  m.config = {{"mode", args.mode},
              {"rank", args.rank},
              {"tol", format_value(args.tol)},
              {"pruning", args.pruning},
              {"restarts", std::to_string(args.restarts)},
              {"refine", args.refine},
              {"polish_iters", std::to_string(args.polish_iters)},
              {"levels", args.levels},
              {"a_constraint", args.a_constraint},
              {"seed", std::to_string(args.seed)}};
  m.timings_seconds["total"] = timer.seconds();
  write_manifest(m, out_path(args.out_dir, "manifest.json"));
  return 0;
}

// ---------------------------------------------------------------- bench

struct SweepArgs {
  std::string setup = "t05", methods = "findvertices,oracle,box";
  std::string alphas = "0,0.01,0.02,0.03,0.04,0.05,0.06,0.07,0.08,0.09,0.1";
  std::string refine = "backward-elim", out_dir = ".";
  Index m = 1000, r = 10, n = 20;
  int trials = 20, restarts = 5, polish_iters = 20, box_restarts = 5;
  double bernoulli_p = 0.5;
  std::uint64_t seed = 0;
};

int run_bench_sweep(const SweepArgs& args) {
  Timer timer;
  std::vector<ExperimentConfig> grid;
  for (double alpha : parse_double_list(args.alphas)) {
    ExperimentConfig cfg;
    cfg.setup = parse_setup(args.setup);
    cfg.m = args.m;
    cfg.r = args.r;
    cfg.n = args.n;
    cfg.noise_alpha = alpha;
    cfg.bernoulli_p = args.bernoulli_p;
    cfg.trials = args.trials;
    cfg.seed = args.seed;
    grid.push_back(cfg);
  }
  std::vector<SweepMethod> methods;
  {
    std::istringstream is(args.methods);
    std::string tok;
    while (std::getline(is, tok, ',')) {
      if (tok == "findvertices")
        methods.push_back(SweepMethod::findvertices);
      else if (tok == "oracle")
        methods.push_back(SweepMethod::oracle);
      else if (tok == "box")
        methods.push_back(SweepMethod::box);
      else
        throw CLI::ValidationError("--methods", "expected findvertices|oracle|box");
    }
  }
  SweepOptions opts;
  opts.restarts = args.restarts;
  opts.refine = parse_refine(args.refine);
  opts.polish_block_iters = args.polish_iters;
  opts.box_restarts = args.box_restarts;

  std::string csv_path = out_path(args.out_dir, "sweep.csv");
  std::ofstream csv(csv_path);
  run_noise_sweep(grid, methods, opts, &csv);

  RunManifest m = base_manifest("bench sweep");
  m.outputs = {csv_path};
  m.config = {{"setup", args.setup},
              {"m", std::to_string(args.m)},
              {"rank", std::to_string(args.r)},
              {"n", std::to_string(args.n)},
              {"alphas", args.alphas},
              {"trials", std::to_string(args.trials)},
              {"methods", args.methods},
              {"restarts", std::to_string(args.restarts)},
              {"refine", args.refine},
              {"polish_iters", std::to_string(args.polish_iters)},
              {"box_restarts", std::to_string(args.box_restarts)},
              {"bernoulli_p", format_value(args.bernoulli_p)},
              {"seed", std::to_string(args.seed)}};
  m.timings_seconds["total"] = timer.seconds();
  write_manifest(m, out_path(args.out_dir, "manifest.json"));
  return 0;
}

struct VertexCountArgs {
  std::string ranks = "8", p_grid = "0.1,0.3,0.5,0.7,0.9", out_dir = ".";
  Index m = 500;
  int trials = 20;
  std::uint64_t seed = 0;
};

int run_bench_vertex_count(const VertexCountArgs& args) {
  Timer timer;
  std::vector<Index> r_list;
  for (double v : parse_double_list(args.ranks)) r_list.push_back(static_cast<Index>(v));
  std::vector<double> p_grid = parse_double_list(args.p_grid);

  std::string csv_path = out_path(args.out_dir, "vertex_counts.csv");
  std::ofstream csv(csv_path);
  vertex_count_study(args.m, r_list, p_grid, args.trials, args.seed, &csv);

  RunManifest m = base_manifest("bench vertex-count");
  m.outputs = {csv_path};
  m.config = {{"m", std::to_string(args.m)},
              {"ranks", args.ranks},
              {"p_grid", args.p_grid},
              {"trials", std::to_string(args.trials)},
              {"seed", std::to_string(args.seed)}};
  m.timings_seconds["total"] = timer.seconds();
  write_manifest(m, out_path(args.out_dir, "manifest.json"));
  return 0;
}

struct RankSweepArgs {
  std::string input, refine = "best-fit", a_constraint = "simplex", levels = "0,1";
  std::string format = "auto", out_dir = ".";
  Index r_min = 2, r_max = 6;
  int restarts = 5, polish_iters = 0;
  std::uint64_t seed = 0;
};

int run_bench_rank_sweep(const RankSweepArgs& args) {
  Timer timer;
  Matrix D = read_matrix(args.input, parse_format(args.format, args.input));
  ApproxConfig base;
  base.restarts = args.restarts;
  base.refine = parse_refine(args.refine);
  base.polish_block_iters = args.polish_iters;
  base.binary_levels = parse_levels(args.levels);
  base.a_constraint = args.a_constraint == "simplex" ? AConstraint::simplex : AConstraint::free;
  base.seed = args.seed;

  std::string csv_path = out_path(args.out_dir, "rank_sweep.csv");
  std::ofstream csv(csv_path);
  rank_sweep(D, args.r_min, args.r_max, base, &csv);

  RunManifest m = base_manifest("bench rank-sweep");
  m.inputs = {args.input};
  m.outputs = {csv_path};
  m.config = {{"r_min", std::to_string(args.r_min)},
              {"r_max", std::to_string(args.r_max)},
              {"restarts", std::to_string(args.restarts)},
              {"refine", args.refine},
              {"polish_iters", std::to_string(args.polish_iters)},
              {"levels", args.levels},
              {"a_constraint", args.a_constraint},
              {"seed", std::to_string(args.seed)}};
  m.timings_seconds["total"] = timer.seconds();
  write_manifest(m, out_path(args.out_dir, "manifest.json"));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bincomp: matrix factorization with binary components"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = all cores)")
      ->envname("BINCOMP_THREADS");

  FindVerticesArgs fv;
  auto* fv_cmd = app.add_subcommand("find-vertices", "enumerate hypercube vertices of aff(D) or span(D)");
  fv_cmd->add_option("input", fv.input, "input matrix (CSV/TSV)")->required();
  fv_cmd->add_option("--mode", fv.mode, "affine|span");
  fv_cmd->add_option("--rank", fv.rank, "rank r, or 'auto'");
  fv_cmd->add_option("--tol", fv.tol, "per-coordinate binary tolerance");
  fv_cmd->add_option("--pruning", fv.pruning, "full|incremental|ilp");
  fv_cmd->add_option("--format", fv.format, "csv|tsv|auto");
  fv_cmd->add_option("--out-dir", fv.out_dir, "output directory");

  FactorizeArgs fz;
  auto* fz_cmd = app.add_subcommand("factorize", "factor D into binary T times real A");
  fz_cmd->add_option("input", fz.input, "input matrix (CSV/TSV)")->required();
  fz_cmd->add_option("--mode", fz.mode, "exact-affine|exact-linear|exact-simplex|three-way|approx");
  fz_cmd->add_option("--rank", fz.rank, "rank r, or 'auto'");
  fz_cmd->add_option("--tol", fz.tol, "per-coordinate binary tolerance");
  fz_cmd->add_option("--pruning", fz.pruning, "full|incremental|ilp");
  fz_cmd->add_option("--restarts", fz.restarts, "restarts for approx mode");
  fz_cmd->add_option("--refine", fz.refine, "none|best-fit|backward-elim");
  fz_cmd->add_option("--polish-iters", fz.polish_iters, "block-descent polish iterations");
  fz_cmd->add_option("--levels", fz.levels, "binary levels lo,hi");
  fz_cmd->add_option("--a-constraint", fz.a_constraint, "free|simplex (approx mode)");
  fz_cmd->add_option("--seed", fz.seed, "random seed");
  fz_cmd->add_option("--format", fz.format, "csv|tsv|auto");
  fz_cmd->add_option("--out-dir", fz.out_dir, "output directory");

  auto* bench = app.add_subcommand("bench", "benchmark harnesses");
  bench->require_subcommand(1);

  SweepArgs sw;
  auto* sw_cmd = bench->add_subcommand("sweep", "noise sweep over synthetic data");
  sw_cmd->add_option("--setup", sw.setup, "t05|tsparse-dense|t05-adense|separable");
  sw_cmd->add_option("--m", sw.m, "rows");
  sw_cmd->add_option("--rank", sw.r, "rank");
  sw_cmd->add_option("--n", sw.n, "columns");
  sw_cmd->add_option("--alphas", sw.alphas, "comma-separated noise levels");
  sw_cmd->add_option("--trials", sw.trials, "trials per cell");
  sw_cmd->add_option("--methods", sw.methods, "subset of findvertices,oracle,box");
  sw_cmd->add_option("--restarts", sw.restarts, "findvertices restarts");
  sw_cmd->add_option("--refine", sw.refine, "findvertices refinement: none|best-fit|backward-elim");
  sw_cmd->add_option("--polish-iters", sw.polish_iters, "findvertices polish iterations");
  sw_cmd->add_option("--box-restarts", sw.box_restarts, "box baseline restarts");
  sw_cmd->add_option("--bernoulli-p", sw.bernoulli_p, "Bernoulli parameter for T*");
  sw_cmd->add_option("--seed", sw.seed, "random seed");
  sw_cmd->add_option("--out-dir", sw.out_dir, "output directory");

  VertexCountArgs vc;
  auto* vc_cmd = bench->add_subcommand("vertex-count", "vertex counts of random binary hulls");
  vc_cmd->add_option("--m", vc.m, "rows");
  vc_cmd->add_option("--ranks", vc.ranks, "comma-separated ranks");
  vc_cmd->add_option("--p-grid", vc.p_grid, "comma-separated Bernoulli parameters");
  vc_cmd->add_option("--trials", vc.trials, "trials per cell");
  vc_cmd->add_option("--seed", vc.seed, "random seed");
  vc_cmd->add_option("--out-dir", vc.out_dir, "output directory");

  RankSweepArgs rs;
  auto* rs_cmd = bench->add_subcommand("rank-sweep", "approximate-fit RMSE as a function of rank");
  rs_cmd->add_option("input", rs.input, "input matrix (CSV/TSV)")->required();
  rs_cmd->add_option("--r-min", rs.r_min, "smallest rank");
  rs_cmd->add_option("--r-max", rs.r_max, "largest rank");
  rs_cmd->add_option("--restarts", rs.restarts, "restarts per rank");
  rs_cmd->add_option("--refine", rs.refine, "none|best-fit|backward-elim");
  rs_cmd->add_option("--polish-iters", rs.polish_iters, "polish iterations");
  rs_cmd->add_option("--levels", rs.levels, "binary levels lo,hi");
  rs_cmd->add_option("--a-constraint", rs.a_constraint, "free|simplex");
  rs_cmd->add_option("--seed", rs.seed, "random seed");
  rs_cmd->add_option("--format", rs.format, "csv|tsv|auto");
  rs_cmd->add_option("--out-dir", rs.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 1;
  }

  set_worker_count(threads);
  try {
    if (*fv_cmd) return run_find_vertices(fv);
    if (*fz_cmd) return run_factorize(fz);
    if (*sw_cmd) return run_bench_sweep(sw);
    if (*vc_cmd) return run_bench_vertex_count(vc);
    if (*rs_cmd) return run_bench_rank_sweep(rs);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "bincomp: " << e.what() << std::endl;
    return 2;
  }
  return 1;
}
