// bhull: command-line front end for the branch-hull solvers.
//
//   bhull solve    --b B.csv --c C.csv --y y.csv --t t.csv --mode robust ...
//   bhull phase    --n-list 20,40 --l-list 4,8,12 --trials 10 --out grid.csv
//   bhull flatten  --in img.pgm --dict dct:3 --out flat.pgm
//   bhull project  --y 1 --t 1 --point 0,0,0
//
// Exit codes: 0 success, 1 input error, 2 solver stopped at max iterations.

#include "bhull/bhull.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNotConverged = 2;

std::vector<int> parse_int_list(const std::string& text, const char* flag) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || v < 1)
      throw std::invalid_argument(std::string(flag) + ": expected positive integers, got '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument(std::string(flag) + ": empty list");
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw std::invalid_argument("invalid number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

bhull::DictionarySpec parse_dict(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("--dict: expected dct:<n>, bessel:<n> or file:<path>");
  const std::string kind = text.substr(0, colon), arg = text.substr(colon + 1);
  bhull::DictionarySpec spec;
  if (kind == "file") {
    spec.kind = bhull::MatrixDict{bhull::io::load_matrix_csv(arg)};
    return spec;
  }
  const auto n = parse_int_list(arg, "--dict");
  if (n.size() != 1) throw std::invalid_argument("--dict: expected one column count");
  spec.frobenius_normalize_to_sqrt_L = true;
  if (kind == "dct")
    spec.kind = bhull::PartialDctDict{n[0], true};
  else if (kind == "bessel")
    spec.kind = bhull::BesselDict{n[0], true};
  else
    throw std::invalid_argument("--dict: unknown kind '" + kind + "'");
  return spec;
}

std::optional<uint64_t> seed_from_env() {
  if (const char* env = std::getenv("BHULL_SEED")) return std::strtoull(env, nullptr, 10);
  return std::nullopt;
}

struct SolveArgs {
  std::string b, c, y, t, mode = "robust";
  double lambda = 1e3, rho = 1.0, tol = 1e-10;
  int iters = 10000;
  int rows = 0, cols = 0;
  std::string p, out_h, out_m, out_xi;
};

int run_solve(const SolveArgs& a) {
  using namespace bhull;
  SolverConfig cfg;
  cfg.mode = parse_mode(a.mode);
  cfg.lambda = a.lambda;
  cfg.rho = a.rho;
  cfg.max_iters = a.iters;
  cfg.tol_primal = cfg.tol_dual = a.tol;
  if (cfg.mode == Mode::TV) {
    if (!a.p.empty())
      cfg.p_matrix = ExplicitP{LinearOperator(io::load_matrix_csv(a.p))};
    else if (a.rows > 0 && a.cols > 0)
      cfg.p_matrix = TvOfB{a.rows, a.cols};
    else
      throw std::invalid_argument("tv mode needs --rows/--cols or --p");
  } else if (!a.p.empty()) {
    cfg.p_matrix = ExplicitP{LinearOperator(io::load_matrix_csv(a.p))};
  }
  cfg.validate();

  const ProblemInstance inst(LinearOperator(io::load_matrix_csv(a.b)),
                             LinearOperator(io::load_matrix_csv(a.c)), io::load_vector_csv(a.y),
                             io::load_vector_csv(a.t));
  const Solution sol = solve(inst, cfg);

  io::save_vector_csv(a.out_h, sol.h_hat);
  io::save_vector_csv(a.out_m, sol.m_hat);
  if (!a.out_xi.empty()) io::save_vector_csv(a.out_xi, sol.xi_hat);

  std::cout << "objective=" << io::format_double(sol.objective) << '\n'
            << "primal_residual=" << io::format_double(sol.primal_residual) << '\n'
            << "dual_residual=" << io::format_double(sol.dual_residual) << '\n'
            << "iterations=" << sol.iters_used << '\n'
            << "feasibility_violation="
            << io::format_double(feasibility_violation(sol.h_hat, sol.m_hat, sol.xi_hat, inst)) << '\n'
            << "converged=" << (sol.converged ? "true" : "false") << '\n';
  return sol.converged ? kOk : kNotConverged;
}

struct PhaseArgs {
  std::string n_list, l_list, out;
  int trials = 10, iters = 10000;
  unsigned threads = 1;
  double rho = 1.0, threshold = 1e-6, tol = 1e-10, line_c = 0.25;
  std::optional<uint64_t> seed;
};

int run_phase(const PhaseArgs& a) {
  using namespace bhull;
  const auto Ns = parse_int_list(a.n_list, "--n-list");
  const auto Ls = parse_int_list(a.l_list, "--l-list");
  if (a.trials < 0) throw std::invalid_argument("--trials must be >= 0");
  const uint64_t seed = a.seed ? *a.seed : seed_from_env().value_or(0);
  PhaseGridOptions opts;
  opts.max_iters = a.iters;
  opts.tol_primal = opts.tol_dual = a.tol;
  opts.threads = a.threads;
  const auto cells = run_phase_grid(Ns, Ls, a.trials, a.rho, a.threshold, seed, opts);
  std::ofstream f(a.out, std::ios::out | std::ios::trunc);
  if (!f) throw io::FormatError("cannot open " + a.out);
  io::write_phase_csv(f, cells, a.line_c);
  for (const auto& c : cells)
    std::cout << "N=" << c.N << " L=" << c.L << " successes=" << c.successes << '/' << c.trials
              << " line=" << io::format_double(theory_line(c.S1, c.S2, c.K, c.N, a.line_c)) << '\n';
  return kOk;
}

struct FlattenArgs {
  std::string in, dict, out, out_m, out_xi;
  double lambda = 1e3, rho = 1e-4, tol = 1e-6;
  int iters = 2000, max_side = 0;
  std::optional<uint64_t> seed;
};

int run_flatten(const FlattenArgs& a) {
  using namespace bhull;
  GrayImage img = io::load_pgm(a.in);
  if (a.max_side > 0 && std::max(img.p, img.q) > a.max_side) {
    const double f = double(a.max_side) / std::max(img.p, img.q);
    img = resize_image(img, std::max(2, int(std::lround(img.p * f))),
                       std::max(2, int(std::lround(img.q * f))));
  }
  FlattenOptions opts;
  opts.lambda = a.lambda;
  opts.rho = a.rho;
  opts.max_iters = a.iters;
  opts.tol = a.tol;
  opts.seed = a.seed ? *a.seed : seed_from_env().value_or(0);
  const FlattenResult res = flatten_image(img, parse_dict(a.dict), opts);
  io::save_pgm(a.out, res.recovered);
  if (!a.out_m.empty()) io::save_vector_csv(a.out_m, res.m_hat);
  if (!a.out_xi.empty()) io::save_vector_csv(a.out_xi, res.xi_hat);
  std::cout << "rows=" << img.p << '\n'
            << "cols=" << img.q << '\n'
            << "objective=" << io::format_double(res.solution.objective) << '\n'
            << "primal_residual=" << io::format_double(res.solution.primal_residual) << '\n'
            << "dual_residual=" << io::format_double(res.solution.dual_residual) << '\n'
            << "iterations=" << res.solution.iters_used << '\n'
            << "converged=" << (res.solution.converged ? "true" : "false") << '\n';
  return kOk;
}

struct ProjectArgs {
  double y = 0.0;
  std::optional<int> s;
  int t = 1;
  std::string point;
};

int run_project(const ProjectArgs& a) {
  using namespace bhull;
  HyperbolaBranch branch{a.y, a.s ? *a.s : sign_of(a.y), a.t};
  branch.validated();
  const auto p = parse_double_list(a.point);
  // Adding 0.0 turns a negative zero into "0".
  auto g = [](double v) { return v + 0.0; };
  char buf[160];
  if (p.size() == 3) {
    const auto r = project3({p[0], p[1], p[2]}, branch);
    std::snprintf(buf, sizeof buf, "point=(%.6g, %.6g, %.6g)", g(r.point[0]), g(r.point[1]),
                  g(r.point[2]));
    std::cout << buf << "\ncase=" << static_cast<int>(r.kkt_case)
              << "\nmultiplier=" << io::format_double(r.multiplier) << '\n';
  } else if (p.size() == 2) {
    const auto r = project2({p[0], p[1]}, branch);
    std::snprintf(buf, sizeof buf, "point=(%.6g, %.6g)", g(r.point[0]), g(r.point[1]));
    std::cout << buf << "\ncase=" << static_cast<int>(r.kkt_case)
              << "\nmultiplier=" << io::format_double(r.multiplier) << '\n';
  } else {
    throw std::invalid_argument("--point: expected x,w or x,w,xi");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse bilinear recovery with l1-BranchHull"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "Solve an instance given as matrix CSV files");
  solve_cmd->add_option("--b", sa.b, "B matrix (L x K)")->required();
  solve_cmd->add_option("--c", sa.c, "C matrix (L x N)")->required();
  solve_cmd->add_option("--y", sa.y, "measurements (L x 1)")->required();
  solve_cmd->add_option("--t", sa.t, "signs of B h (L x 1)")->required();
  solve_cmd->add_option("--mode", sa.mode, "noiseless | robust | tv")->required();
  solve_cmd->add_option("--lambda", sa.lambda, "slack penalty");
  solve_cmd->add_option("--rho", sa.rho, "ADMM step");
  solve_cmd->add_option("--iters", sa.iters, "iteration budget");
  solve_cmd->add_option("--tol", sa.tol, "primal and dual residual tolerance");
  solve_cmd->add_option("--rows", sa.rows, "image rows for tv mode");
  solve_cmd->add_option("--cols", sa.cols, "image cols for tv mode");
  solve_cmd->add_option("--p", sa.p, "explicit P matrix (J x K)");
  solve_cmd->add_option("--out-h", sa.out_h, "output h")->required();
  solve_cmd->add_option("--out-m", sa.out_m, "output m")->required();
  solve_cmd->add_option("--out-xi", sa.out_xi, "output xi");

  PhaseArgs pa;
  auto* phase_cmd = app.add_subcommand("phase", "Empirical recovery rates over an (N, L) grid");
  phase_cmd->add_option("--n-list", pa.n_list, "comma-separated N values (K = N)")->required();
  phase_cmd->add_option("--l-list", pa.l_list, "comma-separated L values")->required();
  phase_cmd->add_option("--trials", pa.trials, "trials per cell");
  phase_cmd->add_option("--rho", pa.rho, "ADMM step");
  phase_cmd->add_option("--threshold", pa.threshold, "success threshold on the l2 error");
  phase_cmd->add_option("--seed", pa.seed, "base seed (default: $BHULL_SEED or 0)");
  phase_cmd->add_option("--iters", pa.iters, "iteration budget per solve");
  phase_cmd->add_option("--tol", pa.tol, "residual tolerance per solve");
  phase_cmd->add_option("--line-c", pa.line_c, "constant of the reference line");
  phase_cmd->add_option("--threads", pa.threads, "worker threads");
  phase_cmd->add_option("--out", pa.out, "output CSV")->required();

  FlattenArgs fa;
  auto* flatten_cmd = app.add_subcommand("flatten", "Remove a multiplicative distortion from a PGM");
  flatten_cmd->add_option("--in", fa.in, "input PGM")->required();
  flatten_cmd->add_option("--dict", fa.dict, "dct:<n> | bessel:<n> | file:<path>")->required();
  flatten_cmd->add_option("--lambda", fa.lambda, "slack penalty");
  flatten_cmd->add_option("--rho", fa.rho, "ADMM step");
  flatten_cmd->add_option("--iters", fa.iters, "iteration budget");
  flatten_cmd->add_option("--tol", fa.tol, "residual tolerance");
  flatten_cmd->add_option("--seed", fa.seed, "dictionary seed (default: $BHULL_SEED or 0)");
  flatten_cmd->add_option("--max-side", fa.max_side, "downsample so neither side exceeds this");
  flatten_cmd->add_option("--out", fa.out, "output PGM")->required();
  flatten_cmd->add_option("--out-m", fa.out_m, "output m");
  flatten_cmd->add_option("--out-xi", fa.out_xi, "output xi");

  ProjectArgs ja;
  auto* project_cmd = app.add_subcommand("project", "Project one point onto a branch hull");
  project_cmd->add_option("--y", ja.y, "measurement")->required();
  project_cmd->add_option("--s", ja.s, "sign of y (default: derived)");
  project_cmd->add_option("--t", ja.t, "sign of w")->required();
  project_cmd->add_option("--point", ja.point, "x,w or x,w,xi")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*solve_cmd) return run_solve(sa);
    if (*phase_cmd) return run_phase(pa);
    if (*flatten_cmd) return run_flatten(fa);
    if (*project_cmd) return run_project(ja);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
