#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "imoc/extract.hpp"
#include "imoc/model.hpp"
#include "imoc/poly.hpp"
#include "imoc/relax.hpp"

namespace imoc {

/// Simulated measure-driven trajectory with instantaneous jumps.
struct Trajectory {
  struct Jump {
    double time = 0.0;
    int channel = -1;
    double amplitude = 0.0;           // native control units
    std::vector<double> state_before;  // x^- at the jump
    std::vector<double> delta;         // G(t_j) * u_{t_j}
  };
  std::vector<double> grid;                 // increasing time samples
  std::vector<std::vector<double>> states;  // per-sample states (post-jump at jump instants)
  std::vector<Jump> jumps;
  double cost = 0.0;
  double horizon = 0.0;
  bool violated = false;        // state left the declared set
  double max_violation = 0.0;   // worst constraint violation observed
};

/// A posteriori optimality-gap check.
struct GapReport {
  double lower_bound = 0.0;   // V_M^d
  double simulated_cost = 0.0;
  double gap = 0.0;           // simulated - bound
  double relative_gap = 0.0;
  std::string verdict;
};

/// Integrates the native problem under an impulse plan: classical fixed-step
/// RK4 between jump instants, algebraic state updates at jumps, quadrature of
/// the running cost on the same grid.
Trajectory simulate(const ImpulsiveOCP& ocp, const ImpulsePlan& plan, int steps = 1000);

/// Scaled-coordinate moments of the occupation measures induced by a
/// simulated trajectory, for checking transcription rows: mu by quadrature,
/// nu+- atoms with the segment-uniform state kernel, boundary point masses.
struct OccupationMoments {
  std::map<MultiIndex, double> mu;                   // over (t, x), scaled
  std::vector<std::map<MultiIndex, double>> nu_plus;   // per channel
  std::vector<std::map<MultiIndex, double>> nu_minus;  // per channel
  std::map<MultiIndex, double> mu0, muT;             // over x, scaled
};
OccupationMoments occupation_moments(const Trajectory& traj, const ImpulsiveOCP& native,
                                     const ScalingMap& map, int max_deg);

/// Worst absolute residual of the given moment rows on oracle moments.
double liouville_residual(const MomentProblem& mp, const OccupationMoments& om);

/// gap = simulated cost - V_M^d; rejects trajectories that left the state set.
GapReport certify(const RelaxationResult& bound, const Trajectory& traj, double epsilon = 1e-4);

/// Hill-Clohessy-Wiltshire relative motion in true-anomaly normalization.
struct HcwModel {
  Eigen::Matrix4d A;
  Eigen::Matrix<double, 4, 2> B;
  Eigen::Vector4d x0 = Eigen::Vector4d::Zero();
  Eigen::Vector4d xf = Eigen::Vector4d::Zero();
  double theta_f = 2.0 * 3.14159265358979323846;

  HcwModel();
};

/// Transition matrix exp(A (theta_b - theta_a)).
Eigen::Matrix4d hcw_transition(const HcwModel& model, double theta_b, double theta_a);

/// Direct LP transcription of the minimum-fuel rendezvous on a uniform
/// N-point grid, solved with the conic solver in pure-LP mode.
struct RendezvousLpResult {
  bool feasible = true;
  double cost = 0.0;
  /// per grid point with nonzero amplitude: (theta, u vector)
  std::vector<std::pair<double, Eigen::Vector2d>> impulses;
};
RendezvousLpResult solve_rendezvous_lp(const HcwModel& model, int N);

}  // namespace imoc
