#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cpop/sdp_problem.hpp"

namespace cpop {

struct SolverOptions {
  double tol_gap = 1e-8;
  double tol_feas = 1e-8;
  double tol_psd = 1e-7;
  int max_iters = 120;
  bool parallel = true;
  bool verbose = false;
};

enum class SdpStatus { optimal, near_optimal, infeasible, unbounded, stalled };

std::string to_string(SdpStatus s);

struct SdpSolution {
  SdpStatus status = SdpStatus::stalled;
  Eigen::VectorXd x;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  // Hermitian G_b with Re tr(B_b(x) G_b) the pairing of block b; real blocks
  // have zero imaginary part.
  std::vector<Eigen::MatrixXcd> block_duals;
  // One multiplier per SdpRow (>= 0 for ge rows).
  std::vector<double> row_duals;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
  std::string solver = "ipm";
};

// Primal-dual path following (HKM direction, Mehrotra predictor-corrector)
// for  min c.x  s.t.  B_b(x) PSD, ge rows >= 0, eq rows = 0.
// Throws IterationLimit or NumericalFailure when no usable iterate exists.
SdpSolution solve_sdp(const SdpProblem& sdp, const SolverOptions& opts = {});

struct SolutionCheck {
  double min_block_eig = 0.0;     // smallest eigenvalue over B_b(x)
  double max_row_violation = 0.0;
  double min_dual_eig = 0.0;      // smallest eigenvalue over G_b
  double stationarity = 0.0;      // |c - A^*(duals)|_inf
  double gap = 0.0;               // primal - dual objective
  bool ok(double tol_psd) const {
    return min_block_eig >= -tol_psd && max_row_violation <= tol_psd &&
           min_dual_eig >= -tol_psd;
  }
};

// Residuals recomputed from the problem data; independent of the solver.
SolutionCheck check_solution(const SdpProblem& sdp, const SdpSolution& sol);

}  // namespace cpop
