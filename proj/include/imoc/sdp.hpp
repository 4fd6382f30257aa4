#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "imoc/relax.hpp"

namespace imoc {

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, Inaccurate, IterationLimit };

std::string to_string(SolveStatus s);

struct SolverOptions {
  double tol_feas = 1e-8;
  double tol_gap = 1e-8;
  int max_iters = 200;
  /// kappa/tau above this ratio forces an infeasibility classification.
  double tau_kappa_ratio_threshold = 1e6;
  bool verbose = false;
};

struct IterateTrace {
  double primal_obj = 0.0, dual_obj = 0.0;
  double gap = 0.0, res_primal = 0.0, res_dual = 0.0;
  double tau = 0.0, kappa = 0.0;
  double step = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::IterationLimit;
  double objective = 0.0;  // c'y + constant, caller units
  Eigen::VectorXd y;       // primal moment vector
  Eigen::VectorXd eq_multipliers;
  Eigen::VectorXd dual_nonneg;              // multipliers of the scalar cone entries
  std::vector<Eigen::MatrixXd> dual_psd;    // multipliers of the PSD blocks
  /// Farkas-type certificate. Primal infeasible: (eq_multipliers, dual cone
  /// multipliers) already hold the normalized dual ray. Dual infeasible:
  /// `certificate_ray` holds the primal ray in y-space.
  Eigen::VectorXd certificate_ray;
  int iterations = 0;
  double res_primal = 0.0, res_dual = 0.0, res_gap = 0.0;
  double tau = 0.0, kappa = 0.0;
  std::vector<IterateTrace> trace;
};

/// Path-following primal-dual interior-point solve of the truncated conic
/// program on a homogeneous self-dual embedding with Nesterov-Todd scaling.
SolveResult solve(const ConicProgram& cp, const SolverOptions& opts = {});

}  // namespace imoc
