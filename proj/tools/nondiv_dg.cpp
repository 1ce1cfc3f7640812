// Command-line driver: single solves, convergence sweeps and the validation suite.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ndg/assembly.hpp"
#include "ndg/mesh.hpp"
#include "ndg/problems.hpp"
#include "ndg/solver.hpp"
#include "ndg/study.hpp"
#include "ndg/validation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitBadArgs = 2;

struct BadArguments : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string problem = "poisson";
  int k = 1;
  int epsilon = 1;
  double gamma = 0.0;  // 0: problem's recommended value
  int n = 8;
  std::vector<int> levels;
  double p = 2.0;
  std::string solver = "direct";
  int quad_degree = 0;
  std::string edge_sampling;
  std::string out;
  std::string plot;
  std::string export_mesh;
  std::string export_matrix;
  bool timing = true;
};

ndg::ProblemSpec load_problem(const RunConfig& rc) {
  if (rc.problem == "manufactured") {
    return ndg::manufactured_polynomial(rc.k, ndg::default_manufactured_matrix());
  }
  try {
    return ndg::builtin(rc.problem);
  } catch (const std::invalid_argument& ex) {
    throw BadArguments(ex.what());
  }
}

ndg::SolveConfig solve_config(const RunConfig& rc, ndg::ProblemSpec& problem) {
  ndg::SolveConfig cfg;
  cfg.k = rc.k;
  cfg.epsilon = rc.epsilon;
  cfg.gamma = rc.gamma > 0.0 ? rc.gamma : problem.gamma;
  cfg.quad_degree = rc.quad_degree;
  if (rc.edge_sampling == "one-sided") {
    problem.A.edge_sampling = ndg::EdgeSampling::one_sided;
  } else if (rc.edge_sampling == "on-edge") {
    problem.A.edge_sampling = ndg::EdgeSampling::on_edge;
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& ex) {
    throw BadArguments(ex.what());
  }
  if (!(rc.p > 1.0)) throw BadArguments("--p must be > 1");
  return cfg;
}

ndg::SolverOptions solver_options(const RunConfig& rc) {
  ndg::SolverOptions opts;
  opts.kind = rc.solver == "gmres" ? ndg::SolverKind::gmres : ndg::SolverKind::direct;
  return opts;
}

/// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw BadArguments("cannot open " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void export_artifacts(const RunConfig& rc, const ndg::ProblemSpec& problem,
                      const ndg::SolveConfig& cfg, int n) {
  if (rc.export_mesh.empty() && rc.export_matrix.empty()) return;
  const ndg::Mesh mesh = ndg::build_uniform_mesh(problem.domain, n);
  if (!rc.export_mesh.empty()) {
    std::ofstream os(rc.export_mesh);
    ndg::write_mesh(os, mesh);
  }
  if (!rc.export_matrix.empty()) {
    std::ofstream os(rc.export_matrix);
    ndg::write_matrix_market(
        os, ndg::assemble_nondiv(mesh, problem.A, problem.f, problem.g, cfg).matrix);
  }
}

int cmd_solve(const RunConfig& rc) {
  ndg::ProblemSpec problem = load_problem(rc);
  const ndg::SolveConfig cfg = solve_config(rc, problem);
  if (rc.n < 1) throw BadArguments("--n must be >= 1");
  Output out(rc.out);
  export_artifacts(rc, problem, cfg, rc.n);
  try {
    const auto row = ndg::run_level(problem, cfg, rc.n, solver_options(rc), rc.p);
    ndg::write_csv(out.stream(), problem.name, cfg, {row}, rc.timing);
  } catch (const std::exception& ex) {
    std::cerr << "solve failed: " << ex.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

std::vector<int> default_levels(const std::string& problem) {
  if (problem == "cordes") return {2, 4, 8, 16, 32, 64};
  return {4, 8, 16, 32};
}

int cmd_convergence(const RunConfig& rc) {
  ndg::ProblemSpec problem = load_problem(rc);
  const ndg::SolveConfig cfg = solve_config(rc, problem);
  const std::vector<int> levels = rc.levels.empty() ? default_levels(rc.problem) : rc.levels;
  if (levels.size() < 3) throw BadArguments("--levels needs at least 3 values");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 1 || (i > 0 && levels[i] <= levels[i - 1])) {
      throw BadArguments("--levels must be positive and strictly increasing");
    }
  }
  Output out(rc.out);
  const auto rows = ndg::run_convergence(problem, cfg, levels, solver_options(rc), rc.p);
  ndg::write_csv(out.stream(), problem.name, cfg, rows, rc.timing);
  if (!rc.plot.empty()) {
    std::ofstream svg(rc.plot);
    ndg::write_svg(svg,
                   problem.name + " k=" + std::to_string(cfg.k) + " eps=" + std::to_string(cfg.epsilon),
                   rows);
  }
  bool ok = true;
  for (const auto& r : rows) {
    if (!r.ok) {
      std::cerr << "level n=" << r.n << " failed: " << r.failure << '\n';
      ok = false;
    }
  }
  return ok ? kExitOk : kExitFailure;
}

int cmd_validate() {
  const auto results = ndg::run_validation();
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    ok = ok && r.passed;
  }
  std::cout << (ok ? "all checks passed" : "validation FAILED") << '\n';
  return ok ? kExitOk : kExitFailure;
}

void add_run_options(CLI::App* cmd, RunConfig& rc, bool sweep) {
  std::vector<std::string> problems = ndg::builtin_names();
  problems.emplace_back("manufactured");
  cmd->add_option("--problem", rc.problem, "Built-in problem")
      ->check(CLI::IsMember(problems));
  cmd->add_option("--k", rc.k, "Polynomial degree (1-4)");
  cmd->add_option("--epsilon", rc.epsilon, "1 symmetric, 0 incomplete, -1 non-symmetric induced")
      ->check(CLI::IsMember({1, 0, -1}));
  cmd->add_option("--gamma", rc.gamma, "Penalty parameter (default: problem's value)");
  if (sweep) {
    cmd->add_option("--levels", rc.levels, "Subdivisions per axis, strictly increasing")
        ->delimiter(',');
    cmd->add_option("--plot", rc.plot, "Write a log-log SVG error plot");
  } else {
    cmd->add_option("--n", rc.n, "Subdivisions per axis");
    cmd->add_option("--export-mesh", rc.export_mesh, "Write the mesh as plain text");
    cmd->add_option("--export-matrix", rc.export_matrix, "Write the matrix in MatrixMarket format");
  }
  cmd->add_option("--p", rc.p, "Error norm exponent");
  cmd->add_option("--solver", rc.solver, "direct or gmres")
      ->check(CLI::IsMember({"direct", "gmres"}));
  cmd->add_option("--quad-degree", rc.quad_degree, "Volume quadrature exactness override");
  cmd->add_option("--edge-sampling", rc.edge_sampling, "Coefficient sampling on edges")
      ->check(CLI::IsMember({"one-sided", "on-edge"}));
  cmd->add_option("--out", rc.out, "CSV output path (default stdout)");
  cmd->add_flag("!--no-timing", rc.timing, "Write 0 in the seconds column");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IP-DG solver for non-divergence form elliptic equations"};
  app.require_subcommand(1);
  RunConfig rc;
  auto* solve = app.add_subcommand("solve", "Solve on one mesh and report errors");
  auto* conv = app.add_subcommand("convergence", "Run a refinement sweep with convergence rates");
  auto* validate = app.add_subcommand("validate", "Run the property-validation suite");
  add_run_options(solve, rc, false);
  add_run_options(conv, rc, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadArgs;
  }

  try {
    if (*solve) return cmd_solve(rc);
    if (*conv) return cmd_convergence(rc);
    if (*validate) return cmd_validate();
  } catch (const BadArguments& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitBadArgs;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitFailure;
  }
  return kExitBadArgs;
}
