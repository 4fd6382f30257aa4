#pragma once

#include "imoc/model.hpp"
#include "imoc/relax.hpp"
#include "imoc/sdp.hpp"
#include "imoc/transcribe.hpp"

namespace imoc {

struct HierarchyOptions {
  BuildOptions transcribe;
  SolverOptions solver;
};

/// Transcribes the (already scaled) problem at relaxation order d, solves the
/// truncated SDP and repackages the moment vector per measure.
RelaxationResult solve_order(const ImpulsiveOCP& scaled, int d, const HierarchyOptions& opts = {});

/// Same, but starting from a prebuilt moment problem and conic program.
RelaxationResult solve_program(const MomentProblem& mp, const ConicProgram& cp,
                               const SolverOptions& opts = {});

/// Solves orders d_min..d_max in sequence on the scaled problem.
std::vector<RelaxationResult> solve_hierarchy(const ImpulsiveOCP& scaled, int d_min, int d_max,
                                              const HierarchyOptions& opts = {});

}  // namespace imoc
