#pragma once

#include <chrono>
#include <cstdio>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include "ndg/assembly.hpp"
#include "ndg/errors.hpp"

namespace ndg {

enum class SolverKind { direct, gmres };

struct SolverOptions {
  SolverKind kind = SolverKind::direct;
  double tol = 1e-10;
  int restart = 50;
  int max_iter = 2000;
  int ilu_fill = 20;
  double ilu_drop = 1e-6;
};

struct SolveReport {
  Eigen::VectorXd x;
  double relative_residual = 0.0;
  int iterations = 0;
  double seconds = 0.0;
};

/// ||b - M x||_2 / ||b||_2, or ||M x||_2 when b = 0.
inline double relative_residual(const SparseMatrix& m, const Eigen::VectorXd& b,
                                const Eigen::VectorXd& x) {
  const double r = (b - m * x).norm();
  const double nb = b.norm();
  return nb > 0.0 ? r / nb : r;
}

namespace detail {

/// b - M x accumulated in extended precision.
inline Eigen::VectorXd extended_residual(const SparseMatrix& m, const Eigen::VectorXd& b,
                                         const Eigen::VectorXd& x) {
  Eigen::VectorXd r(b.size());
  for (Eigen::Index row = 0; row < m.outerSize(); ++row) {
    long double acc = b(row);
    for (SparseMatrix::InnerIterator it(m, row); it; ++it) {
      acc -= static_cast<long double>(it.value()) * x(it.col());
    }
    r(row) = static_cast<double>(acc);
  }
  return r;
}

}  // namespace detail

inline SolveReport solve(const SparseMatrix& matrix, const Eigen::VectorXd& rhs,
                         const SolverOptions& opts = {}) {
  if (matrix.rows() != matrix.cols() || matrix.rows() != rhs.size()) {
    throw std::invalid_argument("solve: system is not square or rhs size mismatch");
  }
  if (!rhs.allFinite()) throw std::invalid_argument("solve: non-finite right-hand side");

  const auto start = std::chrono::steady_clock::now();
  SolveReport rep;
  const Eigen::SparseMatrix<double> colmajor = matrix;

  if (opts.kind == SolverKind::direct) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(colmajor);
    if (lu.info() != Eigen::Success) {
      throw SingularMatrixError("solve: sparse LU factorization failed: " + lu.lastErrorMessage());
    }
    rep.x = lu.solve(rhs);
    rep.relative_residual = relative_residual(matrix, rhs, rep.x);
    // Iterative refinement for badly scaled systems (large penalties).
    for (int step = 0; step < 5 && rep.relative_residual > opts.tol; ++step) {
      const Eigen::VectorXd r = detail::extended_residual(matrix, rhs, rep.x);
      rep.x += lu.solve(r);
      rep.relative_residual = relative_residual(matrix, rhs, rep.x);
    }
    if (!rep.x.allFinite()) throw SingularMatrixError("solve: factorization produced non-finite values");
  } else {
    Eigen::GMRES<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> gmres;
    // Eigen's stopping test uses its own residual estimate; aim below tol so
    // the recomputed residual passes too.
    gmres.setTolerance(0.1 * opts.tol);
    gmres.setMaxIterations(opts.max_iter);
    gmres.set_restart(opts.restart);
    gmres.preconditioner().setFillfactor(opts.ilu_fill);
    gmres.preconditioner().setDroptol(opts.ilu_drop);
    gmres.compute(colmajor);
    if (gmres.info() != Eigen::Success) {
      throw SingularMatrixError("solve: incomplete LU preconditioner failed");
    }
    rep.x = gmres.solve(rhs);
    rep.iterations = static_cast<int>(gmres.iterations());
    auto residual = [&] {
      return rep.x.allFinite() ? relative_residual(matrix, rhs, rep.x)
                               : std::numeric_limits<double>::infinity();
    };
    rep.relative_residual = residual();
    for (int restart = 0; restart < 2 && std::isfinite(rep.relative_residual) &&
                          rep.relative_residual > opts.tol && rep.iterations < opts.max_iter;
         ++restart) {
      rep.x = gmres.solveWithGuess(rhs, rep.x);
      rep.iterations += static_cast<int>(gmres.iterations());
      rep.relative_residual = residual();
    }
  }

  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!(rep.relative_residual <= opts.tol)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "solve: relative residual %.3e above tolerance %.3e",
                  rep.relative_residual, opts.tol);
    throw SolverError(buf,
                      rep.relative_residual);
  }
  return rep;
}

inline SolveReport solve(const SparseSystem& sys, const SolverOptions& opts = {}) {
  return solve(sys.matrix, sys.rhs, opts);
}

}  // namespace ndg
