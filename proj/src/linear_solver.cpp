#include "crossdiff/linear_solver.hpp"

#include <algorithm>

#include <fmt/core.h>
#include <unsupported/Eigen/IterativeSolvers>

#include "crossdiff/errors.hpp"

namespace crossdiff {

namespace {

constexpr int kRestart = 60;
// Restart cycles granted to the Jacobi stage before switching preconditioners.
constexpr int kJacobiRestarts = 5;
constexpr double kTightestInnerTolerance = 1e-18;

double relative_residual(const SparseMatrix& a, const Eigen::VectorXd& b, const Eigen::VectorXd& x,
                         double b_norm) {
  return (b - a * x).norm() / b_norm;
}

// GMRES stops on the preconditioned residual; tighten until the true residual agrees.
template <class Preconditioner>
bool gmres_stage(const SparseMatrix& a, const Eigen::VectorXd& b, Eigen::VectorXd& x, double b_norm,
                 double tolerance, int max_iterations, LinearSolveStats& stats) {
  Eigen::GMRES<SparseMatrix, Preconditioner> gmres;
  gmres.set_restart(static_cast<int>(std::min<Eigen::Index>(kRestart, b.size())));
  gmres.compute(a);
  if (gmres.info() != Eigen::Success) return false;

  stats.iterations = 0;
  double inner = tolerance;
  while (stats.iterations < max_iterations) {
    gmres.setTolerance(inner);
    gmres.setMaxIterations(max_iterations - stats.iterations);
    Eigen::VectorXd next = gmres.solveWithGuess(b, x);
    stats.iterations += static_cast<int>(gmres.iterations());
    const double res = relative_residual(a, b, next, b_norm);
    if (res <= stats.residual) {
      x = std::move(next);
      stats.residual = res;
    }
    if (stats.residual <= tolerance) {
      stats.converged = true;
      return true;
    }
    if (gmres.info() == Eigen::Success) {
      inner *= 0.1;
      if (inner < kTightestInnerTolerance) break;
    } else if (gmres.iterations() == 0) {
      break;
    }
  }
  return false;
}

}  // namespace

LinearSolveStats solve_linear(const SparseMatrix& a, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                              double tolerance, int max_iterations) {
  LinearSolveStats stats;
  const double b_norm = b.norm();
  if (b_norm == 0.0) {
    x.setZero(b.size());
    stats.converged = true;
    return stats;
  }
  if (x.size() != b.size()) x.setZero(b.size());

  stats.residual = relative_residual(a, b, x, b_norm);
  if (stats.residual <= tolerance) {
    stats.converged = true;
    return stats;
  }

  const int jacobi_budget = std::min(max_iterations, kJacobiRestarts * kRestart);
  if (gmres_stage<Eigen::DiagonalPreconditioner<double>>(a, b, x, b_norm, tolerance, jacobi_budget, stats))
    return stats;
  // Penalty terms make the diagonal a poor preconditioner; fall back to incomplete LU.
  const int used = stats.iterations;
  const bool ok = gmres_stage<Eigen::IncompleteLUT<double>>(a, b, x, b_norm, tolerance, max_iterations, stats);
  stats.iterations += used;
  if (ok) return stats;
  throw SolverFailure(fmt::format("linear solver did not reach residual {:.3e} in {} iterations (residual {:.3e})",
                                  tolerance, max_iterations, stats.residual),
                      stats.residual);
}

}  // namespace crossdiff
