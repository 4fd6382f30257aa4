#pragma once

#include <optional>
#include <string>
#include <vector>

#include "imoc/poly.hpp"

namespace imoc {

/// {z : a_i(z) >= 0} with every a_i over the same variable space.
struct SemialgebraicSet {
  int n_vars = 0;
  std::vector<Polynomial> inequalities;
};

struct BoundaryCondition {
  enum class Kind { Dirac, UniformBox, Free };
  Kind kind = Kind::Dirac;
  std::vector<double> point;           // Dirac
  std::vector<double> lo, hi;          // UniformBox
  SemialgebraicSet set;                // Free (over state variables only)
};

enum class ControlMode { SignedMeasure, DiscreteSet };

/// Impulsive, affine-in-control polynomial optimal control problem.
/// Polynomials in f, h, h_T live over (t, x_1..x_n); G and H depend on t only.
struct ImpulsiveOCP {
  int n_states = 0;
  int m_controls = 0;
  double horizon = 0.0;  // T (or theta_f); for free final time this is T_max

  std::vector<Polynomial> dynamics;                 // f, one per state
  std::vector<std::vector<Polynomial>> control_matrix;  // G, n x m, t only
  Polynomial running_cost;                          // h(t, x)
  std::vector<Polynomial> control_cost;             // H_c(t), one per channel
  Polynomial terminal_cost;                         // h_T(t, x)
  /// When set, the control-cost term weighs |nu| = nu+ + nu- instead of nu
  /// (one-norm fuel objectives). Signed-measure mode only.
  bool tv_cost = false;

  SemialgebraicSet state_set;     // X, over (t, x)
  SemialgebraicSet initial_set;   // X_0, over (t, x), t exponent 0
  SemialgebraicSet terminal_set;  // X_T, over (t, x), t exponent 0
  BoundaryCondition initial;
  BoundaryCondition terminal;

  std::optional<double> tv_bound;
  ControlMode control_mode = ControlMode::SignedMeasure;
  std::vector<std::vector<double>> control_values;  // rows of U (discrete mode)
  bool free_final_time = false;

  /// Declared state ranges used for internal scaling.
  std::vector<double> state_lo, state_hi;

  std::vector<std::string> state_names;

  ImpulsiveOCP() : running_cost(1), terminal_cost(1) {}

  int n_vars() const { return n_states + 1; }
};

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity;
  std::string message;
};

/// Static checks on a problem description. Returns diagnostics, never throws.
std::vector<Diagnostic> validate(const ImpulsiveOCP& ocp);
bool has_errors(const std::vector<Diagnostic>& diags);

/// Affine change of variables t = T*t~, x_i = center_i + radius_i * x~_i
/// taking the native problem onto t~ in [0,1], x~ in [-1,1]^n.
struct ScalingMap {
  double horizon = 1.0;
  std::vector<double> center, radius;

  double time_to_native(double t_scaled) const { return horizon * t_scaled; }
  double time_to_scaled(double t_native) const { return t_native / horizon; }
  std::vector<double> state_to_native(const std::vector<double>& x_scaled) const;
  std::vector<double> state_to_scaled(const std::vector<double>& x_native) const;
};

/// Rewrites the problem on the unit time interval and unit state box.
/// The optimal value is invariant (running cost absorbs the factor T);
/// impulse amplitudes keep their native units.
std::pair<ImpulsiveOCP, ScalingMap> scale(const ImpulsiveOCP& ocp);

}  // namespace imoc
