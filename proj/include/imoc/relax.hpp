#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "imoc/transcribe.hpp"

namespace imoc {

struct LinearTerm {
  int var;
  double coeff;
};

/// Affine form over the aggregated moment variables.
struct EntryForm {
  std::vector<LinearTerm> terms;
  double constant = 0.0;
};

/// Moment matrix (no generator) or localizing matrix (with generator) of an
/// unknown measure, with entries expressed over the variable layout.
struct MatrixStructure {
  int owner = -1;  // measure index in the MomentProblem roster
  std::optional<Polynomial> generator;
  int order = 0;
  int side = 0;
  /// Packed upper triangle, row-major: entry (r, c) with r <= c.
  std::vector<EntryForm> entries;

  const EntryForm& at(int r, int c) const;
  EntryForm& at(int r, int c);
};

struct VariableLayout {
  struct MeasureVars {
    int offset = 0;
    std::vector<MultiIndex> basis;        // graded-lex moment indices up to 2d
    std::map<MultiIndex, int> position;   // index -> global variable
  };
  std::vector<MeasureVars> per_measure;
  int n_vars = 0;

  int var(int measure, const MultiIndex& k) const;
};

struct SparseRow {
  std::vector<LinearTerm> terms;
  double rhs = 0.0;
};

/// Truncated order-d semidefinite program over the aggregated moment vector.
struct ConicProgram {
  int order = 0;
  VariableLayout layout;
  std::vector<std::pair<int, int>> groups;  // (offset, count) per measure; used
                                            // for block-diagonal Schur solves
  std::vector<SparseRow> equalities;
  std::vector<EntryForm> nonneg;    // scalar cone entries (order-0 localizers, slacks)
  std::vector<MatrixStructure> psd;
  std::vector<LinearTerm> objective;
  double objective_constant = 0.0;

  int n_vars() const { return layout.n_vars; }
};

enum class RelaxStatus { Optimal, PrimalInfeasible, DualInfeasible, Inaccurate, IterationLimit };

std::string to_string(RelaxStatus s);

struct MomentVector {
  int measure = -1;
  std::map<MultiIndex, double> values;
};

struct RelaxationResult {
  int order = 0;
  RelaxStatus status = RelaxStatus::IterationLimit;
  double bound = 0.0;  // V_M^d, native units
  std::vector<MomentVector> moments;  // one per roster measure
  int iterations = 0;
  double residual_primal = 0.0, residual_dual = 0.0, residual_gap = 0.0;
  std::vector<double> certificate;  // Farkas dual (infeasible) or primal ray (unbounded)
  double solve_seconds = 0.0;
};

/// Smallest admissible relaxation order d1.
int first_order(const MomentProblem& mp);

VariableLayout make_layout(const MomentProblem& mp, int order);

MatrixStructure moment_matrix(const MomentProblem& mp, const VariableLayout& layout, int owner,
                              int order);

/// Localizing matrix of generator a at relaxation order d; its own order is
/// d - ceil(deg a / 2). Throws when that would be negative.
MatrixStructure localizing_matrix(const MomentProblem& mp, const VariableLayout& layout,
                                  int owner, const Polynomial& a, int d);

/// Truncation of the moment problem at order d: sliced equality rows, one
/// moment matrix per unknown measure, localizing matrices per support
/// inequality plus canonical time-interval pairs and the redundant ball
/// generator (deduplicated against user-declared inequalities).
ConicProgram assemble(const MomentProblem& mp, int d);

}  // namespace imoc
