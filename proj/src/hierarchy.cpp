#include "imoc/hierarchy.hpp"

#include <chrono>

namespace imoc {

namespace {

RelaxStatus map_status(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return RelaxStatus::Optimal;
    case SolveStatus::PrimalInfeasible: return RelaxStatus::PrimalInfeasible;
    case SolveStatus::DualInfeasible: return RelaxStatus::DualInfeasible;
    case SolveStatus::Inaccurate: return RelaxStatus::Inaccurate;
    case SolveStatus::IterationLimit: return RelaxStatus::IterationLimit;
  }
  return RelaxStatus::IterationLimit;
}

}  // namespace

RelaxationResult solve_program(const MomentProblem& mp, const ConicProgram& cp,
                               const SolverOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  SolveResult sr = solve(cp, opts);
  auto t1 = std::chrono::steady_clock::now();

  RelaxationResult rr;
  rr.order = cp.order;
  rr.status = map_status(sr.status);
  rr.bound = sr.objective;
  rr.iterations = sr.iterations;
  rr.residual_primal = sr.res_primal;
  rr.residual_dual = sr.res_dual;
  rr.residual_gap = sr.res_gap;
  rr.solve_seconds = std::chrono::duration<double>(t1 - t0).count();

  if ((sr.status == SolveStatus::Optimal || sr.status == SolveStatus::Inaccurate ||
       sr.status == SolveStatus::IterationLimit) &&
      sr.y.size() == cp.n_vars()) {
    for (size_t mi = 0; mi < mp.measures.size(); ++mi) {
      MomentVector mv;
      mv.measure = static_cast<int>(mi);
      const auto& slot = cp.layout.per_measure[mi];
      for (size_t k = 0; k < slot.basis.size(); ++k)
        mv.values.emplace(slot.basis[k], sr.y[slot.offset + static_cast<int>(k)]);
      rr.moments.push_back(std::move(mv));
    }
  }
  if (sr.status == SolveStatus::PrimalInfeasible) {
    rr.certificate.assign(sr.eq_multipliers.data(),
                          sr.eq_multipliers.data() + sr.eq_multipliers.size());
  } else if (sr.status == SolveStatus::DualInfeasible) {
    rr.certificate.assign(sr.certificate_ray.data(),
                          sr.certificate_ray.data() + sr.certificate_ray.size());
  }
  return rr;
}

RelaxationResult solve_order(const ImpulsiveOCP& scaled, int d, const HierarchyOptions& opts) {
  MomentProblem mp = build(scaled, d, opts.transcribe);
  ConicProgram cp = assemble(mp, d);
  return solve_program(mp, cp, opts.solver);
}

std::vector<RelaxationResult> solve_hierarchy(const ImpulsiveOCP& scaled, int d_min, int d_max,
                                              const HierarchyOptions& opts) {
  std::vector<RelaxationResult> out;
  for (int d = d_min; d <= d_max; ++d) out.push_back(solve_order(scaled, d, opts));
  return out;
}

}  // namespace imoc
