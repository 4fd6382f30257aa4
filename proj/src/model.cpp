#include "imoc/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace imoc {

namespace {

bool mentions_state(const Polynomial& p) {
  for (const auto& [k, c] : p.terms())
    for (int i = 1; i < k.n_vars(); ++i)
      if (k.exponents[i] > 0) return true;
  return false;
}

// A generator bounds state i if it contains a negative coefficient on an even
// power of x_i (covers 1 - x_i^2 boxes and r^2 - sum x_j^2 balls).
bool bounds_state(const SemialgebraicSet& set, int state) {
  for (const auto& a : set.inequalities)
    for (const auto& [k, c] : a.terms()) {
      int e = k.exponents[state + 1];
      if (e >= 2 && e % 2 == 0 && c < 0.0) return true;
    }
  return false;
}

Polynomial map_to_scaled(const Polynomial& p, const ScalingMap& map) {
  Polynomial q = p.substitute_affine(0, map.horizon, 0.0);
  for (size_t i = 0; i < map.center.size(); ++i)
    q = q.substitute_affine(static_cast<int>(i) + 1, map.radius[i], map.center[i]);
  return q;
}

SemialgebraicSet map_set(const SemialgebraicSet& set, const ScalingMap& map) {
  SemialgebraicSet out;
  out.n_vars = set.n_vars;
  for (const auto& a : set.inequalities) out.inequalities.push_back(map_to_scaled(a, map));
  return out;
}

}  // namespace

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
    return d.severity == Diagnostic::Severity::Error;
  });
}

std::vector<Diagnostic> validate(const ImpulsiveOCP& ocp) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string m) { out.push_back({Diagnostic::Severity::Error, std::move(m)}); };
  auto warn = [&](std::string m) { out.push_back({Diagnostic::Severity::Warning, std::move(m)}); };

  if (ocp.n_states < 1) error("problem must have at least one state");
  if (ocp.m_controls < 1) error("problem must have at least one control channel");
  if (!(ocp.horizon > 0.0)) error("horizon must be positive");
  const int nv = ocp.n_vars();

  if (static_cast<int>(ocp.dynamics.size()) != ocp.n_states)
    error("dynamics must list one polynomial per state");
  for (const auto& f : ocp.dynamics)
    if (f.n_vars() != nv) error("dynamics polynomial has inconsistent variable count");

  if (static_cast<int>(ocp.control_matrix.size()) != ocp.n_states) {
    error("control matrix must have one row per state");
  } else {
    for (const auto& row : ocp.control_matrix) {
      if (static_cast<int>(row.size()) != ocp.m_controls)
        error("control matrix must have one column per control channel");
      for (const auto& g : row) {
        if (g.n_vars() != nv) error("control matrix polynomial has inconsistent variable count");
        if (mentions_state(g)) error("control matrix depends on state");
      }
    }
  }
  for (const auto& hc : ocp.control_cost)
    if (mentions_state(hc)) error("control cost depends on state");

  if (ocp.running_cost.n_vars() != nv || ocp.terminal_cost.n_vars() != nv)
    error("cost polynomial has inconsistent variable count");

  // the state set may be described by inequalities, by declared ranges
  // (scaling synthesizes the interval generators), or both
  if (ocp.state_set.inequalities.empty() && ocp.state_lo.empty())
    error("state set must be described");
  for (const auto& a : ocp.state_set.inequalities)
    if (a.n_vars() != nv) error("state set polynomial has inconsistent variable count");

  auto check_dirac = [&](const BoundaryCondition& bc, const SemialgebraicSet& set,
                         const char* which) {
    if (bc.kind != BoundaryCondition::Kind::Dirac) return;
    if (static_cast<int>(bc.point.size()) != ocp.n_states) {
      error(std::string(which) + " dirac point has wrong dimension");
      return;
    }
    std::vector<double> z(nv, 0.0);
    for (int i = 0; i < ocp.n_states; ++i) z[i + 1] = bc.point[i];
    for (const auto& a : set.inequalities)
      if (a.n_vars() == nv && a.evaluate(z) < -1e-12)
        error(std::string(which) + " dirac point violates its declared set");
    if (ocp.state_lo.size() == bc.point.size() && ocp.state_hi.size() == bc.point.size())
      for (size_t i = 0; i < bc.point.size(); ++i)
        if (bc.point[i] < ocp.state_lo[i] - 1e-12 || bc.point[i] > ocp.state_hi[i] + 1e-12)
          error(std::string(which) + " dirac point lies outside the declared state range");
  };
  check_dirac(ocp.initial, ocp.initial_set, "initial");
  check_dirac(ocp.terminal, ocp.terminal_set, "terminal");

  if (ocp.initial.kind == BoundaryCondition::Kind::Free && ocp.initial_set.inequalities.empty() &&
      ocp.initial.set.inequalities.empty())
    error("free initial state requires a described set");

  if (ocp.control_mode == ControlMode::DiscreteSet) {
    if (ocp.tv_bound.has_value())
      error("total variation bound is not available with a discrete control set");
    if (ocp.tv_cost) error("total variation objective is not available with a discrete control set");
    if (ocp.control_values.empty()) error("discrete control set must be nonempty");
    for (const auto& u : ocp.control_values)
      if (static_cast<int>(u.size()) != ocp.m_controls)
        error("discrete control value has wrong dimension");
  }
  if (ocp.tv_bound.has_value() && *ocp.tv_bound < 0.0)
    error("total variation bound must be nonnegative");

  if (static_cast<int>(ocp.state_lo.size()) != ocp.n_states ||
      static_cast<int>(ocp.state_hi.size()) != ocp.n_states) {
    warn("state ranges missing; problem cannot be scaled");
  } else {
    for (int i = 0; i < ocp.n_states; ++i)
      if (!(ocp.state_lo[i] < ocp.state_hi[i])) error("state range is degenerate");
  }

  for (int i = 0; i < ocp.n_states && !has_errors(out); ++i)
    if (!bounds_state(ocp.state_set, i))
      warn("no ball-type constraint bounds state " + std::to_string(i + 1) +
           "; compactness relies on declared ranges");

  return out;
}

std::vector<double> ScalingMap::state_to_native(const std::vector<double>& x) const {
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = center[i] + radius[i] * x[i];
  return out;
}

std::vector<double> ScalingMap::state_to_scaled(const std::vector<double>& x) const {
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - center[i]) / radius[i];
  return out;
}

std::pair<ImpulsiveOCP, ScalingMap> scale(const ImpulsiveOCP& ocp) {
  if (static_cast<int>(ocp.state_lo.size()) != ocp.n_states ||
      static_cast<int>(ocp.state_hi.size()) != ocp.n_states)
    throw std::runtime_error("scale: state ranges unavailable");

  ScalingMap map;
  map.horizon = ocp.horizon;
  map.center.resize(ocp.n_states);
  map.radius.resize(ocp.n_states);
  for (int i = 0; i < ocp.n_states; ++i) {
    map.center[i] = 0.5 * (ocp.state_lo[i] + ocp.state_hi[i]);
    map.radius[i] = 0.5 * (ocp.state_hi[i] - ocp.state_lo[i]);
    if (!(map.radius[i] > 0.0)) throw std::runtime_error("scale: degenerate state range");
  }

  ImpulsiveOCP s = ocp;
  s.horizon = 1.0;
  const double T = map.horizon;

  for (int i = 0; i < ocp.n_states; ++i) {
    s.dynamics[i] = map_to_scaled(ocp.dynamics[i], map) * (T / map.radius[i]);
    for (int c = 0; c < ocp.m_controls; ++c)
      s.control_matrix[i][c] = map_to_scaled(ocp.control_matrix[i][c], map) * (1.0 / map.radius[i]);
  }
  s.running_cost = map_to_scaled(ocp.running_cost, map) * T;
  for (int c = 0; c < ocp.m_controls; ++c)
    s.control_cost[c] = map_to_scaled(ocp.control_cost[c], map);
  s.terminal_cost = map_to_scaled(ocp.terminal_cost, map);

  s.state_set = map_set(ocp.state_set, map);
  // canonical interval generators 1 - x_i >= 0, 1 + x_i >= 0 on the scaled states
  for (int i = 0; i < ocp.n_states; ++i) {
    for (double sign : {-1.0, 1.0}) {
      Polynomial g = Polynomial::constant(ocp.n_vars(), 1.0);
      MultiIndex lin = MultiIndex::zero(ocp.n_vars());
      lin.exponents[i + 1] = 1;
      g.add_term(lin, sign);
      bool present = false;
      for (const auto& a : s.state_set.inequalities)
        if (a == g) present = true;
      if (!present) s.state_set.inequalities.push_back(g);
    }
  }
  s.initial_set = map_set(ocp.initial_set, map);
  s.terminal_set = map_set(ocp.terminal_set, map);

  auto map_bc = [&](const BoundaryCondition& bc) {
    BoundaryCondition out = bc;
    if (bc.kind == BoundaryCondition::Kind::Dirac) {
      out.point = map.state_to_scaled(bc.point);
    } else if (bc.kind == BoundaryCondition::Kind::UniformBox) {
      out.lo = map.state_to_scaled(bc.lo);
      out.hi = map.state_to_scaled(bc.hi);
    } else {
      out.set = map_set(bc.set, map);
    }
    return out;
  };
  s.initial = map_bc(ocp.initial);
  s.terminal = map_bc(ocp.terminal);

  // discrete control densities pick up the time factor; impulse amplitudes do not
  if (ocp.control_mode == ControlMode::DiscreteSet) {
    for (auto& u : s.control_values)
      for (auto& v : u) v *= T;
  }

  for (int i = 0; i < ocp.n_states; ++i) {
    s.state_lo[i] = -1.0;
    s.state_hi[i] = 1.0;
  }
  return {s, map};
}

}  // namespace imoc
