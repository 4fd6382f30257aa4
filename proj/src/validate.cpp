#include "imoc/validate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

#include "imoc/sdp.hpp"
#include "imoc/transcribe.hpp"

namespace imoc {

namespace {

struct Event {
  double time;
  int channel;
  double amplitude;
};

std::vector<Event> plan_events(const ImpulsePlan& plan, double horizon) {
  std::vector<Event> ev;
  for (size_t c = 0; c < plan.channels.size(); ++c)
    for (const auto& im : plan.channels[c]) {
      if (im.time < -1e-9 || im.time > horizon + 1e-9)
        throw std::invalid_argument("simulate: impulse time outside the horizon");
      ev.push_back({std::clamp(im.time, 0.0, horizon), static_cast<int>(c), im.amplitude});
    }
  std::stable_sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.channel < b.channel;
  });
  return ev;
}

std::vector<double> eval_dynamics(const ImpulsiveOCP& ocp, double t,
                                  const std::vector<double>& x) {
  std::vector<double> point(ocp.n_vars());
  point[0] = t;
  for (int i = 0; i < ocp.n_states; ++i) point[i + 1] = x[i];
  std::vector<double> dx(ocp.n_states);
  for (int i = 0; i < ocp.n_states; ++i) dx[i] = ocp.dynamics[i].evaluate(point);
  return dx;
}

/// One classical RK4 step of the state together with the running-cost
/// quadrature variable.
void rk4_step(const ImpulsiveOCP& ocp, double t, double hstep, std::vector<double>& x,
              double& cost) {
  const int n = ocp.n_states;
  auto rate = [&](double tt, const std::vector<double>& xx, double& cdot) {
    std::vector<double> point(ocp.n_vars());
    point[0] = tt;
    for (int i = 0; i < n; ++i) point[i + 1] = xx[i];
    cdot = ocp.running_cost.evaluate(point);
    return eval_dynamics(ocp, tt, xx);
  };
  double c1, c2, c3, c4;
  std::vector<double> k1 = rate(t, x, c1);
  std::vector<double> x2(n), x3(n), x4(n);
  for (int i = 0; i < n; ++i) x2[i] = x[i] + 0.5 * hstep * k1[i];
  std::vector<double> k2 = rate(t + 0.5 * hstep, x2, c2);
  for (int i = 0; i < n; ++i) x3[i] = x[i] + 0.5 * hstep * k2[i];
  std::vector<double> k3 = rate(t + 0.5 * hstep, x3, c3);
  for (int i = 0; i < n; ++i) x4[i] = x[i] + hstep * k3[i];
  std::vector<double> k4 = rate(t + hstep, x4, c4);
  for (int i = 0; i < n; ++i)
    x[i] += hstep / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  cost += hstep / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
}

double set_violation(const ImpulsiveOCP& ocp, double t, const std::vector<double>& x) {
  std::vector<double> point(ocp.n_vars());
  point[0] = t;
  for (int i = 0; i < ocp.n_states; ++i) point[i + 1] = x[i];
  double worst = 0.0;
  for (const auto& a : ocp.state_set.inequalities)
    worst = std::max(worst, -a.evaluate(point));
  return worst;
}

/// Average of prod_i x_i^{b_i} over the segment x(s) = lo + s*(hi-lo), s in [0,1],
/// by expanding the product of affine factors into a polynomial in s.
double segment_average(const std::vector<double>& lo, const std::vector<double>& delta,
                       const MultiIndex& b) {
  std::vector<double> coeff = {1.0};  // polynomial in s
  for (size_t i = 0; i < lo.size(); ++i) {
    for (int e = 0; e < b.exponents[static_cast<int>(i)]; ++e) {
      std::vector<double> next(coeff.size() + 1, 0.0);
      for (size_t k = 0; k < coeff.size(); ++k) {
        next[k] += coeff[k] * lo[i];
        next[k + 1] += coeff[k] * delta[i];
      }
      coeff = std::move(next);
    }
  }
  double avg = 0.0;
  for (size_t k = 0; k < coeff.size(); ++k) avg += coeff[k] / static_cast<double>(k + 1);
  return avg;
}

}  // namespace

Trajectory simulate(const ImpulsiveOCP& ocp, const ImpulsePlan& plan, int steps) {
  if (steps < 1) throw std::invalid_argument("simulate: steps must be positive");
  const double T = ocp.horizon;
  const int n = ocp.n_states;

  Trajectory traj;
  traj.horizon = T;
  if (ocp.initial.kind != BoundaryCondition::Kind::Dirac)
    throw std::invalid_argument("simulate: needs a fixed initial state");
  std::vector<double> x = ocp.initial.point;
  traj.grid.push_back(0.0);
  traj.states.push_back(x);

  auto events = plan_events(plan, T);
  size_t next_event = 0;
  double t = 0.0;
  double cost = 0.0;

  auto apply_jumps_at = [&](double tj) {
    while (next_event < events.size() && events[next_event].time <= tj + 1e-12) {
      const Event& ev = events[next_event];
      Trajectory::Jump jump;
      jump.time = ev.time;
      jump.channel = ev.channel;
      jump.amplitude = ev.amplitude;
      jump.state_before = x;
      jump.delta.resize(n);
      std::vector<double> point(ocp.n_vars(), 0.0);
      point[0] = ev.time;
      for (int i = 0; i < n; ++i)
        jump.delta[i] = ocp.control_matrix[i][ev.channel].evaluate(point) * ev.amplitude;
      for (int i = 0; i < n; ++i) x[i] += jump.delta[i];
      double hval = ocp.control_cost[ev.channel].evaluate(point);
      cost += hval * (ocp.tv_cost ? std::abs(ev.amplitude) : ev.amplitude);
      traj.jumps.push_back(std::move(jump));
      traj.grid.push_back(ev.time);
      traj.states.push_back(x);
      ++next_event;
    }
  };

  apply_jumps_at(0.0);
  traj.max_violation = set_violation(ocp, 0.0, x);

  while (t < T - 1e-12) {
    double t_stop = next_event < events.size() ? events[next_event].time : T;
    t_stop = std::min(t_stop, T);
    if (t_stop > t + 1e-12) {
      int nseg = std::max(1, static_cast<int>(std::ceil(steps * (t_stop - t) / T)));
      double hstep = (t_stop - t) / nseg;
      for (int k = 0; k < nseg; ++k) {
        rk4_step(ocp, t, hstep, x, cost);
        t += hstep;
        traj.grid.push_back(t);
        traj.states.push_back(x);
        traj.max_violation = std::max(traj.max_violation, set_violation(ocp, t, x));
      }
      t = t_stop;
    } else {
      t = t_stop;
    }
    apply_jumps_at(t);
  }
  apply_jumps_at(T);

  std::vector<double> point(ocp.n_vars());
  point[0] = T;
  for (int i = 0; i < n; ++i) point[i + 1] = x[i];
  cost += ocp.terminal_cost.evaluate(point);
  traj.cost = cost;
  traj.violated = traj.max_violation > 1e-6;
  return traj;
}

OccupationMoments occupation_moments(const Trajectory& traj, const ImpulsiveOCP& native,
                                     const ScalingMap& map, int max_deg) {
  const int n = native.n_states;
  const int nv = native.n_vars();
  const double T = map.horizon;
  OccupationMoments om;
  om.nu_plus.resize(native.m_controls);
  om.nu_minus.resize(native.m_controls);

  auto scale_state = [&](const std::vector<double>& x) { return map.state_to_scaled(x); };

  // boundary point masses
  std::vector<MultiIndex> xbasis = enumerate_basis(n, max_deg);
  auto point_mass = [&](const std::vector<double>& xs) {
    std::map<MultiIndex, double> m;
    for (const auto& k : xbasis) {
      double v = 1.0;
      for (int i = 0; i < n; ++i)
        for (int e = 0; e < k.exponents[i]; ++e) v *= xs[i];
      m.emplace(k, v);
    }
    return m;
  };
  om.mu0 = point_mass(scale_state(traj.states.front()));
  om.muT = point_mass(scale_state(traj.states.back()));

  // mu by re-integration: RK4 quadrature of t~^a x~(t)^b dt~ alongside the state
  std::vector<MultiIndex> basis = enumerate_basis(nv, max_deg);
  std::vector<double> acc(basis.size(), 0.0);
  std::vector<double> x = traj.states.front();

  auto integrand = [&](double t, const std::vector<double>& xx, std::vector<double>& out) {
    double ts = map.time_to_scaled(t);
    std::vector<double> xs = scale_state(xx);
    for (size_t j = 0; j < basis.size(); ++j) {
      double v = 1.0;
      for (int e = 0; e < basis[j].exponents[0]; ++e) v *= ts;
      for (int i = 0; i < n; ++i)
        for (int e = 0; e < basis[j].exponents[i + 1]; ++e) v *= xs[i];
      out[j] = v / T;  // dt~ = dt / T
    }
  };

  auto drift = [&](double t, const std::vector<double>& xx) {
    return eval_dynamics(native, t, xx);
  };

  size_t jpos = 0;
  double t = 0.0;
  std::vector<double> f1(basis.size()), f2(basis.size()), f3(basis.size()), f4(basis.size());
  int steps = std::max(1000, static_cast<int>(traj.grid.size()));

  auto advance_to = [&](double t_stop) {
    if (t_stop <= t + 1e-14) return;
    int nseg = std::max(1, static_cast<int>(std::ceil(steps * (t_stop - t) / T)));
    double hstep = (t_stop - t) / nseg;
    for (int k = 0; k < nseg; ++k) {
      std::vector<double> k1 = drift(t, x);
      integrand(t, x, f1);
      std::vector<double> x2(n), x3(n), x4(n);
      for (int i = 0; i < n; ++i) x2[i] = x[i] + 0.5 * hstep * k1[i];
      std::vector<double> k2 = drift(t + 0.5 * hstep, x2);
      integrand(t + 0.5 * hstep, x2, f2);
      for (int i = 0; i < n; ++i) x3[i] = x[i] + 0.5 * hstep * k2[i];
      std::vector<double> k3 = drift(t + 0.5 * hstep, x3);
      integrand(t + 0.5 * hstep, x3, f3);
      for (int i = 0; i < n; ++i) x4[i] = x[i] + hstep * k3[i];
      std::vector<double> k4 = drift(t + hstep, x4);
      integrand(t + hstep, x4, f4);
      for (int i = 0; i < n; ++i)
        x[i] += hstep / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      for (size_t j = 0; j < basis.size(); ++j)
        acc[j] += hstep / 6.0 * (f1[j] + 2.0 * f2[j] + 2.0 * f3[j] + f4[j]);
      t += hstep;
    }
    t = t_stop;
  };

  while (jpos < traj.jumps.size() || t < T - 1e-12) {
    double t_stop = jpos < traj.jumps.size() ? traj.jumps[jpos].time : T;
    advance_to(std::min(t_stop, T));
    while (jpos < traj.jumps.size() && traj.jumps[jpos].time <= t + 1e-12) {
      const auto& jump = traj.jumps[jpos];
      std::vector<double> lo = scale_state(x);
      std::vector<double> delta(n);
      for (int i = 0; i < n; ++i) delta[i] = jump.delta[i] / map.radius[i];
      double ts = map.time_to_scaled(jump.time);
      auto& target = jump.amplitude >= 0.0 ? om.nu_plus[jump.channel]
                                           : om.nu_minus[jump.channel];
      double w = std::abs(jump.amplitude);
      for (const auto& kb : basis) {
        double tv = 1.0;
        for (int e = 0; e < kb.exponents[0]; ++e) tv *= ts;
        MultiIndex xb(std::vector<int>(kb.exponents.begin() + 1, kb.exponents.end()));
        double v = w * tv * segment_average(lo, delta, xb);
        auto [it, fresh] = target.emplace(kb, v);
        if (!fresh) it->second += v;
      }
      for (int i = 0; i < n; ++i) x[i] += jump.delta[i];
      ++jpos;
    }
  }

  for (size_t j = 0; j < basis.size(); ++j) om.mu.emplace(basis[j], acc[j]);
  // make sure untouched channels still carry explicit zero moments
  for (int c = 0; c < native.m_controls; ++c)
    for (const auto& kb : basis) {
      om.nu_plus[c].emplace(kb, 0.0);
      om.nu_minus[c].emplace(kb, 0.0);
    }
  return om;
}

double liouville_residual(const MomentProblem& mp, const OccupationMoments& om) {
  double worst = 0.0;
  for (const auto& row : mp.rows) {
    double acc = -row.rhs;
    bool usable = true;
    for (const auto& term : row.terms) {
      const auto& m = mp.measures[term.measure];
      const std::map<MultiIndex, double>* src = nullptr;
      switch (m.id.tag) {
        case MeasureId::Tag::Occupation: src = &om.mu; break;
        case MeasureId::Tag::NuPlus: src = &om.nu_plus[m.id.channel]; break;
        case MeasureId::Tag::NuMinus: src = &om.nu_minus[m.id.channel]; break;
        case MeasureId::Tag::Initial: src = &om.mu0; break;
        case MeasureId::Tag::Terminal: src = &om.muT; break;
        default: usable = false; break;
      }
      if (!usable) break;
      auto it = src->find(term.index);
      if (it == src->end()) {
        usable = false;
        break;
      }
      acc += term.coeff * it->second;
    }
    if (usable) worst = std::max(worst, std::abs(acc));
  }
  return worst;
}

GapReport certify(const RelaxationResult& bound, const Trajectory& traj, double epsilon) {
  if (traj.violated)
    throw std::invalid_argument("certify: trajectory leaves the declared state set");
  GapReport rep;
  rep.lower_bound = bound.bound;
  rep.simulated_cost = traj.cost;
  rep.gap = traj.cost - bound.bound;
  rep.relative_gap = rep.gap / std::max(1.0, std::abs(traj.cost));
  if (rep.gap <= epsilon)
    rep.verdict = "globally optimal within " + std::to_string(epsilon);
  else
    rep.verdict = "suboptimality gap " + std::to_string(rep.gap);
  return rep;
}

HcwModel::HcwModel() {
  A << 0, 0, 1, 0,
       0, 0, 0, 1,
       0, 0, 0, 2,
       0, 3, -2, 0;
  B << 0, 0,
       0, 0,
       1, 0,
       0, 1;
}

Eigen::Matrix4d hcw_transition(const HcwModel& model, double theta_b, double theta_a) {
  Eigen::Matrix4d M = model.A * (theta_b - theta_a);
  return M.exp();
}

RendezvousLpResult solve_rendezvous_lp(const HcwModel& model, int N) {
  if (N < 2) throw std::invalid_argument("solve_rendezvous_lp: need at least two grid points");
  const int m = 2;           // in-plane thrust channels
  const int nvar = 2 * m * N;  // u+ then u- per grid point

  ConicProgram cp;
  cp.layout.n_vars = nvar;
  cp.groups.emplace_back(0, nvar);
  auto var = [&](int i, int c, bool plus) { return (i * m + c) * 2 + (plus ? 0 : 1); };

  Eigen::Vector4d rhs = model.xf - hcw_transition(model, model.theta_f, 0.0) * model.x0;
  std::vector<Eigen::Matrix<double, 4, 2>> phiB(N);
  for (int i = 0; i < N; ++i) {
    double theta = model.theta_f * i / (N - 1);
    phiB[i] = hcw_transition(model, model.theta_f, theta) * model.B;
  }
  for (int rowi = 0; rowi < 4; ++rowi) {
    SparseRow row;
    row.rhs = rhs[rowi];
    for (int i = 0; i < N; ++i)
      for (int c = 0; c < m; ++c) {
        double coeff = phiB[i](rowi, c);
        if (coeff == 0.0) continue;
        row.terms.push_back({var(i, c, true), coeff});
        row.terms.push_back({var(i, c, false), -coeff});
      }
    cp.equalities.push_back(std::move(row));
  }
  for (int v = 0; v < nvar; ++v) {
    EntryForm e;
    e.terms.push_back({v, 1.0});
    cp.nonneg.push_back(std::move(e));
    cp.objective.push_back({v, 1.0});
  }

  SolveResult sr = solve(cp, {});
  RendezvousLpResult out;
  if (sr.status == SolveStatus::PrimalInfeasible || sr.status == SolveStatus::DualInfeasible) {
    out.feasible = false;
    return out;
  }
  out.cost = sr.objective;
  for (int i = 0; i < N; ++i) {
    Eigen::Vector2d u;
    for (int c = 0; c < m; ++c) u[c] = sr.y[var(i, c, true)] - sr.y[var(i, c, false)];
    if (u.cwiseAbs().sum() >= 1e-6)
      out.impulses.emplace_back(model.theta_f * i / (N - 1), u);
  }
  return out;
}

}  // namespace imoc
