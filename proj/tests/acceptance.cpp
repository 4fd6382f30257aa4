// Acceptance suite: one criterion per invocation (--criterion N), printing a
// single pass/fail line with the pinned tolerances spelled out in each check.
#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "imoc/hierarchy.hpp"
#include "imoc/problem_io.hpp"
#include "imoc/validate.hpp"

using namespace imoc;

namespace {

const std::string kProblemDir = IMOC_PROBLEM_DIR;

struct Checker {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      std::ostringstream os;
      os << what << ": got " << got << ", want " << want << " +/- " << tol;
      failures.push_back(os.str());
    }
  }
};

ImpulsiveOCP load(const std::string& stem) {
  return load_problem(kProblemDir + "/" + stem + ".prob").ocp;
}

struct Solved {
  ImpulsiveOCP scaled;
  ScalingMap map;
  MomentProblem mp;
  ConicProgram cp;
  RelaxationResult result;
};

Solved solve_at(const ImpulsiveOCP& native, int d) {
  Solved s;
  std::tie(s.scaled, s.map) = scale(native);
  s.mp = build(s.scaled, d);
  s.cp = assemble(s.mp, d);
  s.result = solve_program(s.mp, s.cp);
  return s;
}

/// Farkas residual of a primal-infeasibility certificate: the dual ray must
/// satisfy A'y - L'z = 0, z in the dual cone, and b'y + h'z = -1 (normalized).
double farkas_residual(const ConicProgram& cp, const SolveResult& r) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(cp.n_vars());
  double affine_part = 0.0;
  for (size_t i = 0; i < cp.equalities.size(); ++i) {
    for (const auto& t : cp.equalities[i].terms)
      g[t.var] += t.coeff * r.eq_multipliers[static_cast<int>(i)];
    affine_part += cp.equalities[i].rhs * r.eq_multipliers[static_cast<int>(i)];
  }
  double cone_feas = 0.0;
  for (size_t i = 0; i < cp.nonneg.size(); ++i) {
    double z = r.dual_nonneg[static_cast<int>(i)];
    cone_feas = std::max(cone_feas, -z);
    for (const auto& t : cp.nonneg[i].terms) g[t.var] -= t.coeff * z;
    affine_part += cp.nonneg[i].constant * z;
  }
  for (size_t j = 0; j < cp.psd.size(); ++j) {
    const auto& blk = cp.psd[j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.dual_psd[j]);
    cone_feas = std::max(cone_feas, -es.eigenvalues().minCoeff());
    for (int a = 0; a < blk.side; ++a)
      for (int b = a; b < blk.side; ++b) {
        double w = (a == b) ? 1.0 : 2.0;
        for (const auto& t : blk.at(a, b).terms)
          g[t.var] -= w * t.coeff * r.dual_psd[j](a, b);
        affine_part += w * blk.at(a, b).constant * r.dual_psd[j](a, b);
      }
  }
  double sep = affine_part + 1.0;
  return std::max({g.lpNorm<Eigen::Infinity>(), cone_feas, std::abs(sep)});
}

// ---------------------------------------------------------------------------

void criterion_1(Checker& c) {
  auto p = load("ex1");
  auto d1 = solve_at(p, 1);
  c.expect(d1.result.status == RelaxStatus::Optimal ||
               d1.result.status == RelaxStatus::Inaccurate,
           "d=1 solve did not finish: " + to_string(d1.result.status));
  c.near(d1.result.bound, 0.0, 1e-5, "V at d=1");

  // marginals of the occupation measure at d=2, converted to native units and
  // compared up to degree 2d-1 = 3 (the top even moment is only one-sidedly
  // constrained by the truncation)
  auto d2 = solve_at(p, 2);
  const auto& mu = d2.result.moments[0].values;
  const double T = p.horizon;
  for (int k = 0; k <= 3; ++k) {
    double scaled_moment = mu.at(MultiIndex({k, 0}));
    double native = std::pow(T, k + 1) * scaled_moment;
    double lebesgue = std::pow(T, k + 1) / (k + 1);
    c.near(native, lebesgue, 1e-4, "t-marginal moment " + std::to_string(k));
  }
  for (int b = 0; b <= 3; ++b) {
    double native = T * mu.at(MultiIndex({0, b}));
    double dirac0 = (b == 0) ? T : 0.0;
    c.near(native, dirac0, 1e-4, "x-marginal moment " + std::to_string(b));
  }
}

void criterion_2(Checker& c) {
  auto p = load("ex2");
  auto d1 = solve_at(p, 1);
  c.near(d1.result.bound, 0.125, 1e-4, "V at d=1");
  auto d2 = solve_at(p, 2);
  c.near(d2.result.bound, 0.125, 1e-4, "V at d=2");

  auto plan = identify_controls(d2.result, d2.mp, d2.scaled, d2.map, {});
  c.expect(!plan.non_atomic, "control measure reported non-atomic");
  if (plan.channels.size() == 1 && plan.channels[0].size() == 2) {
    c.near(plan.channels[0][0].time, 0.0, 1e-4, "first impulse time");
    c.near(plan.channels[0][0].amplitude, -0.75, 1e-3, "first impulse weight");
    c.near(plan.channels[0][1].time, 2.0, 1e-4, "second impulse time");
    c.near(plan.channels[0][1].amplitude, 0.25, 1e-3, "second impulse weight");

    auto traj = simulate(p, plan, 2000);
    auto rep = certify(d2.result, traj, 1e-4);
    c.expect(rep.gap <= 1e-4, "certified gap " + std::to_string(rep.gap) + " > 1e-4");
  } else {
    c.expect(false, "expected one channel with two impulses");
  }
}

void criterion_3(Checker& c) {
  auto p = load("ex3");
  auto [scaled, map] = scale(p);
  auto results = solve_hierarchy(scaled, 1, 4);
  const double want[] = {0.000, 0.288, 0.368, 0.372};
  for (int d = 1; d <= 4; ++d)
    c.near(results[d - 1].bound, want[d - 1], 0.01, "V at d=" + std::to_string(d));
  for (int d = 1; d < 4; ++d)
    c.expect(results[d].bound >= results[d - 1].bound - 1e-6,
             "bounds not non-decreasing at d=" + std::to_string(d + 1));
  for (int d = 1; d <= 4; ++d)
    c.expect(results[d - 1].bound <= 0.375 + 1e-6,
             "bound exceeds the analytic optimum 0.375 at d=" + std::to_string(d));
}

void criterion_4(Checker& c) {
  auto p = load("ex4");
  auto [scaled, map] = scale(p);
  auto mp = build(scaled, 1);
  auto cp = assemble(mp, 1);
  auto r = solve(cp);
  c.expect(r.status == SolveStatus::PrimalInfeasible,
           "expected primal_infeasible, got " + to_string(r.status));
  if (r.status == SolveStatus::PrimalInfeasible) {
    double res = farkas_residual(cp, r);
    c.expect(res <= 1e-6, "farkas certificate residual " + std::to_string(res) + " > 1e-6");
  }
}

void criterion_5(Checker& c) {
  auto p = load("ex5");
  auto s = solve_at(p, 1);
  c.expect(s.result.status == RelaxStatus::DualInfeasible,
           "expected dual_infeasible (unbounded), got " + to_string(s.result.status));
  c.expect(!s.result.certificate.empty(), "missing primal ray certificate");
}

void criterion_6(Checker& c) {
  auto p = load("ex6");
  auto [scaled, map] = scale(p);
  auto results = solve_hierarchy(scaled, 2, 5);
  for (size_t i = 0; i + 1 < results.size(); ++i)
    c.expect(results[i + 1].bound >= results[i].bound - 1e-6,
             "bounds not monotone at step " + std::to_string(i));
  c.near(results.back().bound, 2.15, 0.03, "minimum time at d=5");
}

void criterion_7(Checker& c) {
  HcwModel m;
  m.x0 << 1.0, 0.0, 0.0, 0.0;
  auto lp = solve_rendezvous_lp(m, 50);
  c.expect(lp.feasible, "LP transcription infeasible");
  c.near(lp.cost, 0.1061, 1e-3, "V_LP at N=50");
  c.expect(lp.impulses.size() == 2,
           "expected two LP impulses, got " + std::to_string(lp.impulses.size()));
  if (lp.impulses.size() == 2) {
    c.near(lp.impulses.front().first, 0.0, 1e-9, "first LP impulse anomaly");
    c.near(lp.impulses.back().first, m.theta_f, 1e-9, "second LP impulse anomaly");
    for (const auto& [theta, u] : lp.impulses) {
      c.near(std::abs(u[0]), 0.05305, 1e-3, "LP impulse radial-channel magnitude");
      c.near(u[1], 0.0, 1e-3, "LP impulse second channel");
    }
    c.expect(lp.impulses.front().second[0] * lp.impulses.back().second[0] < 0.0,
             "LP impulses should have opposite signs");
  }

  auto p = load("rdv_case1");
  auto s = solve_at(p, 2);
  c.near(s.result.bound, 0.1061, 2e-3, "LMI bound at d=2");
  auto plan = identify_controls(s.result, s.mp, s.scaled, s.map, {});
  c.expect(!plan.non_atomic, "extraction reported non-atomic");
  c.expect(plan.channels.size() == 2, "expected two control channels");
  if (plan.channels.size() == 2) {
    c.expect(plan.channels[0].size() == 2,
             "expected two atoms on channel 1, got " +
                 std::to_string(plan.channels[0].size()));
    for (const auto& imp : plan.channels[0])
      c.near(std::abs(imp.amplitude), 0.0531, 2e-3, "channel-1 atom magnitude");
    if (plan.channels[0].size() == 2)
      c.expect(plan.channels[0][0].amplitude * plan.channels[0][1].amplitude < 0.0,
               "channel-1 atoms should have opposite signs");
    for (const auto& imp : plan.channels[1])
      c.expect(std::abs(imp.amplitude) <= 2e-3,
               "unexpected channel-2 atom of size " + std::to_string(imp.amplitude));
  }
}

void criterion_8(Checker& c) {
  // reference values for the four-impulse solution (LP and LMI methods)
  const double lp_theta[] = {0.0, 1.795, 4.488, 6.283};
  const double lp_u1[] = {-0.0392, 0.109, -0.109, 0.0392};
  const double lmi_theta[] = {0.0, 1.791, 4.495, 6.283};
  const double lmi_u1[] = {-0.0386, 0.109, -0.109, 0.0389};

  HcwModel m;
  m.x0 << 1.0, 0.0, 0.0, 0.0;
  m.xf << 0.0, 0.0, 0.0, 0.427;
  auto lp = solve_rendezvous_lp(m, 50);
  c.expect(lp.feasible, "LP transcription infeasible");
  c.expect(lp.impulses.size() == 4,
           "expected four LP impulses, got " + std::to_string(lp.impulses.size()));
  if (lp.impulses.size() == 4) {
    for (int i = 0; i < 4; ++i) {
      c.near(lp.impulses[i].first, lp_theta[i], 0.01,
             "LP impulse anomaly " + std::to_string(i));
      c.near(lp.impulses[i].second[0], lp_u1[i], 1e-3,
             "LP impulse amplitude " + std::to_string(i));
      c.near(lp.impulses[i].second[1], 0.0, 1e-3,
             "LP impulse second channel " + std::to_string(i));
    }
  }

  auto p = load("rdv_case3");
  auto [scaled, map] = scale(p);
  auto low = solve_hierarchy(scaled, 1, 3);
  const double want[] = {0.0463, 0.0680, 0.2188};
  for (int d = 1; d <= 3; ++d)
    c.near(low[d - 1].bound, want[d - 1], 0.01, "LMI bound at d=" + std::to_string(d));

  auto s = solve_at(p, 4);
  c.expect(s.result.status == RelaxStatus::Optimal ||
               s.result.status == RelaxStatus::Inaccurate,
           "d=4 status " + to_string(s.result.status));
  c.near(s.result.bound, 0.2972, 0.01, "LMI bound at d=4");

  auto plan = identify_controls(s.result, s.mp, s.scaled, s.map, {});
  c.expect(!plan.non_atomic, "d=4 extraction reported non-atomic");
  c.expect(plan.channels.size() == 2, "expected two control channels");
  if (plan.channels.size() == 2) {
    c.expect(plan.channels[0].size() == 4,
             "expected four atoms on channel 1, got " +
                 std::to_string(plan.channels[0].size()));
    if (plan.channels[0].size() == 4) {
      for (int i = 0; i < 4; ++i) {
        c.near(plan.channels[0][i].time, lmi_theta[i], 0.01,
               "extracted anomaly " + std::to_string(i));
        c.near(plan.channels[0][i].amplitude, lmi_u1[i], 0.01,
               "extracted amplitude " + std::to_string(i));
      }
    }
    // the second channel converges to the zero measure; solver noise may
    // leave small spurious atoms below the matching tolerance
    for (const auto& imp : plan.channels[1])
      c.expect(std::abs(imp.amplitude) <= 0.01,
               "unexpected channel-2 atom of size " + std::to_string(imp.amplitude));
  }
}

void criterion_9(Checker& c) {
  // (a) Liouville residual on 20 random rendezvous impulse plans
  {
    auto np = load_problem(kProblemDir + "/rdv_case1.prob");
    std::mt19937 rng(20260823);
    std::uniform_int_distribution<int> n_jumps(1, 3);
    std::uniform_real_distribution<double> when(0.0, np.ocp.horizon);
    std::uniform_real_distribution<double> how_much(-0.1, 0.1);
    std::uniform_int_distribution<int> which(0, np.ocp.m_controls - 1);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      ImpulsePlan plan;
      plan.channels.resize(np.ocp.m_controls);
      int k = n_jumps(rng);
      for (int j = 0; j < k; ++j)
        plan.channels[which(rng)].push_back({when(rng), how_much(rng)});
      for (auto& ch : plan.channels)
        std::sort(ch.begin(), ch.end(),
                  [](const auto& a, const auto& b) { return a.time < b.time; });
      auto traj = simulate(np.ocp, plan, 4000);
      ImpulsiveOCP prob = np.ocp;
      prob.terminal.point = traj.states.back();
      for (const auto& x : traj.states)
        for (int i = 0; i < prob.n_states; ++i) {
          prob.state_lo[i] = std::min(prob.state_lo[i], x[i] - 0.1);
          prob.state_hi[i] = std::max(prob.state_hi[i], x[i] + 0.1);
        }
      auto [scaled, map] = scale(prob);
      auto mp = build(scaled, 2);
      auto om = occupation_moments(traj, prob, map, 4);
      worst = std::max(worst, liouville_residual(mp, om));
    }
    c.expect(worst <= 1e-6,
             "worst Liouville residual " + std::to_string(worst) + " > 1e-6");
  }

  // (b) weak duality and determinism on a family with known optima
  {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> radius(0.25, 4.0);
    for (int trial = 0; trial < 10; ++trial) {
      double r = radius(rng);
      ConicProgram cp;
      cp.layout.n_vars = 2;
      cp.groups.emplace_back(0, 2);
      MatrixStructure blk;
      blk.owner = 0;
      blk.side = 2;
      blk.entries.resize(3);
      blk.entries[0].constant = 1.0;
      blk.entries[1].terms = {{0, 1.0}};
      blk.entries[2].terms = {{1, 1.0}};
      cp.psd.push_back(blk);
      EntryForm cap;
      cap.terms = {{1, -1.0}};
      cap.constant = r;
      cp.nonneg.push_back(cap);
      cp.objective = {{0, 1.0}};

      auto a = solve(cp);
      c.expect(a.status == SolveStatus::Optimal, "cone family solve failed");
      c.near(a.objective, -std::sqrt(r), 1e-6, "cone family optimum");
      double dual = -cp.nonneg[0].constant * a.dual_nonneg[0];
      for (int i = 0; i < blk.side; ++i)
        for (int j = i; j < blk.side; ++j)
          dual -= ((i == j) ? 1.0 : 2.0) * blk.at(i, j).constant * a.dual_psd[0](i, j);
      c.expect(dual <= a.objective + 1e-6, "weak duality violated");
      auto b = solve(cp);
      c.expect(a.objective == b.objective && a.iterations == b.iterations &&
                   a.y.isApprox(b.y, 0.0),
               "solver is not deterministic");
    }
  }

  // (c) atom reconstruction on 50 random 1-3 atom measures
  {
    std::mt19937 rng(42);
    std::uniform_int_distribution<int> n_atoms(1, 3);
    std::uniform_real_distribution<double> where(0.0, 1.0);
    std::uniform_real_distribution<double> mass(0.1, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      int r = n_atoms(rng);
      std::vector<std::pair<double, double>> atoms;
      while (static_cast<int>(atoms.size()) < r) {
        double loc = where(rng);
        bool separated = true;
        for (const auto& a : atoms) separated &= std::abs(a.first - loc) > 0.05;
        if (separated) atoms.emplace_back(loc, mass(rng));
      }
      std::vector<double> mom(2 * r + 1, 0.0);
      for (int k = 0; k <= 2 * r; ++k)
        for (const auto& [loc, w] : atoms) mom[k] += w * std::pow(loc, k);
      auto am = atoms_from_moments(mom, r);
      c.expect(static_cast<int>(am.atoms.size()) == r, "wrong atom count");
      c.expect(am.residual <= 1e-5,
               "reconstruction residual " + std::to_string(am.residual) + " > 1e-5");
    }
  }

  // (d) scale/unscale round-trips
  {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> pick(-5.0, 5.0);
    std::uniform_real_distribution<double> width(0.1, 10.0);
    for (int trial = 0; trial < 25; ++trial) {
      ImpulsiveOCP p;
      p.n_states = 3;
      p.m_controls = 1;
      p.horizon = width(rng);
      p.dynamics.assign(3, Polynomial(4));
      p.control_matrix.assign(3, {Polynomial(4)});
      p.control_matrix[0][0] = Polynomial::constant(4, 1.0);
      p.control_cost = {Polynomial(4)};
      for (int i = 0; i < 3; ++i) {
        double lo = pick(rng);
        p.state_lo.push_back(lo);
        p.state_hi.push_back(lo + width(rng));
      }
      p.initial.point = {0.0, 0.0, 0.0};
      p.terminal.kind = BoundaryCondition::Kind::Free;
      p.terminal.set.n_vars = 4;
      auto [scaled, map] = scale(p);
      std::vector<double> x(3);
      for (int i = 0; i < 3; ++i)
        x[i] = p.state_lo[i] +
               (p.state_hi[i] - p.state_lo[i]) * 0.5 * (1 + std::sin(trial + i));
      auto back = map.state_to_native(map.state_to_scaled(x));
      for (int i = 0; i < 3; ++i)
        c.expect(std::abs(back[i] - x[i]) <= 1e-12 * std::max(1.0, std::abs(x[i])),
                 "state round-trip drifted");
      double t = 0.37 * p.horizon;
      c.expect(std::abs(map.time_to_native(map.time_to_scaled(t)) - t) <= 1e-12 * p.horizon,
               "time round-trip drifted");
    }
  }

  // (e) monotone bounds on the budgeted and discrete basic problems
  for (const char* stem : {"ex2", "ex3"}) {
    auto [scaled, map] = scale(load(stem));
    auto results = solve_hierarchy(scaled, 1, 3);
    for (size_t i = 0; i + 1 < results.size(); ++i)
      c.expect(results[i + 1].bound >= results[i].bound - 1e-6,
               std::string(stem) + " bounds not monotone");
  }
}

}  // namespace

int main(int argc, char** argv) {
  int criterion = 0;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
      criterion = std::atoi(argv[++i]);
  if (criterion < 1 || criterion > 9) {
    std::fprintf(stderr, "usage: acceptance --criterion <1..9>\n");
    return 2;
  }

  Checker c;
  try {
    switch (criterion) {
      case 1: criterion_1(c); break;
      case 2: criterion_2(c); break;
      case 3: criterion_3(c); break;
      case 4: criterion_4(c); break;
      case 5: criterion_5(c); break;
      case 6: criterion_6(c); break;
      case 7: criterion_7(c); break;
      case 8: criterion_8(c); break;
      case 9: criterion_9(c); break;
    }
  } catch (const std::exception& e) {
    c.failures.push_back(std::string("exception: ") + e.what());
  }

  if (c.failures.empty()) {
    std::printf("criterion %d: PASS\n", criterion);
    return 0;
  }
  std::printf("criterion %d: FAIL\n", criterion);
  for (const auto& f : c.failures) std::printf("  - %s\n", f.c_str());
  return 1;
}
