#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace crossdiff {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct LinearSolveStats {
  int iterations = 0;
  double residual = 0.0;  // ||b - A x|| / ||b||
  bool converged = false;
};

// Restarted GMRES with Jacobi preconditioning, retried with incomplete LU if that stalls.
// Terminates on the true relative residual.
// x holds the initial guess on entry. Throws SolverFailure when max_iterations is exhausted.
LinearSolveStats solve_linear(const SparseMatrix& a, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                              double tolerance, int max_iterations);

}  // namespace crossdiff
