#pragma once

#include <map>
#include <string>
#include <vector>

#include "imoc/model.hpp"
#include "imoc/poly.hpp"

namespace imoc {

/// Identity of one unknown measure in the transcription.
struct MeasureId {
  enum class Tag {
    Occupation,   // mu over (t, x)
    NuPlus,       // positive control part, per channel, over (t, x)
    NuMinus,      // negative control part, per channel, over (t, x)
    NuDiscrete,   // probability of choosing control value i, over (t, x)
    Initial,      // free mu_0 over x
    Terminal,     // free mu_T; over x (fixed final time) or (t, x) (free final time)
    Slack         // scalar nonnegative slack (a point measure, single moment)
  };
  Tag tag = Tag::Occupation;
  int channel = -1;  // control channel or discrete-value index

  bool operator==(const MeasureId& o) const { return tag == o.tag && channel == o.channel; }
};

struct MeasureInfo {
  MeasureId id;
  std::string name;
  int n_vars = 0;           // 0 for slack
  bool includes_time = false;
  std::vector<Polynomial> support;  // generators a_i >= 0 over this measure's variables
};

struct MomentTerm {
  int measure;       // index into MomentProblem::measures
  MultiIndex index;  // moment index over that measure's variables
  double coeff;
};

struct MomentRow {
  std::vector<MomentTerm> terms;
  double rhs = 0.0;
  int test_degree = 0;        // degree of the generating test monomial (when applicable)
  int max_moment_degree = 0;  // highest moment degree referenced
};

/// Linear moment problem: minimize cost over aggregated moment sequences
/// subject to equality rows; measure supports carry the cone structure.
struct MomentProblem {
  std::vector<MeasureInfo> measures;
  std::vector<MomentRow> rows;
  std::vector<MomentTerm> cost;
  double cost_constant = 0.0;
  int build_order = 0;  // relaxation order the rows were generated for

  int find_measure(MeasureId id) const;
};

/// Moments of a fixed boundary measure over the state variables, up to max_deg.
/// Dirac at p gives y_k = p^k; a uniform box gives normalized interval moments.
std::map<MultiIndex, double> boundary_moments(const BoundaryCondition& bc, int n_states,
                                              int max_deg);

struct BuildOptions {
  /// Keep fixed boundary measures as unknowns with equality-pinned moments
  /// instead of folding them into right-hand sides (debugging aid).
  bool pin_boundary_measures = false;
};

/// Liouville constraint row for one test monomial v = t^a x^b of the scaled
/// problem. Fixed boundary measures contribute to the right-hand side.
MomentRow liouville_row(const MultiIndex& v, const ImpulsiveOCP& ocp, const MomentProblem& mp,
                        const BuildOptions& opts = {});

/// Total-variation budget row sum_c (mass nu_c+ + mass nu_c-) + slack = bound.
MomentRow tv_row(double bound, const MomentProblem& mp);

/// Discrete-control closure rows sum_i y_w^{nu_i} = y_w^mu for the test
/// monomials w = t^a x^b of degree <= 2d with x-degree at most one.
std::vector<MomentRow> discrete_control_rows(const ImpulsiveOCP& ocp, const MomentProblem& mp,
                                             int order);

/// Full transcription of a validated, scaled problem at relaxation order d.
/// Rows are emitted for every test monomial whose referenced moments all fit
/// within degree 2d.
MomentProblem build(const ImpulsiveOCP& ocp, int order, const BuildOptions& opts = {});

}  // namespace imoc
