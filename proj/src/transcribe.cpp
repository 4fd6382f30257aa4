#include "imoc/transcribe.hpp"

#include <cmath>
#include <stdexcept>

namespace imoc {

namespace {

// x-part of an index over (t, x)
MultiIndex state_part(const MultiIndex& k) {
  return MultiIndex(std::vector<int>(k.exponents.begin() + 1, k.exponents.end()));
}

SemialgebraicSet eliminate_time(const SemialgebraicSet& set, double t_value) {
  SemialgebraicSet out;
  out.n_vars = set.n_vars - 1;
  for (const auto& a : set.inequalities) {
    Polynomial p = a.eliminate(0, t_value);
    if (!p.is_zero() || a.is_zero()) out.inequalities.push_back(p);
  }
  return out;
}

int update_max_degree(MomentRow& row) {
  row.max_moment_degree = 0;
  for (const auto& t : row.terms)
    row.max_moment_degree = std::max(row.max_moment_degree, t.index.degree());
  return row.max_moment_degree;
}

void add_term(MomentRow& row, int measure, MultiIndex k, double coeff) {
  if (coeff == 0.0) return;
  for (auto& t : row.terms)
    if (t.measure == measure && t.index == k) {
      t.coeff += coeff;
      return;
    }
  row.terms.push_back({measure, std::move(k), coeff});
}

}  // namespace

int MomentProblem::find_measure(MeasureId id) const {
  for (size_t i = 0; i < measures.size(); ++i)
    if (measures[i].id == id) return static_cast<int>(i);
  return -1;
}

std::map<MultiIndex, double> boundary_moments(const BoundaryCondition& bc, int n_states,
                                              int max_deg) {
  if (bc.kind == BoundaryCondition::Kind::Free)
    throw std::invalid_argument("boundary_moments: free boundary has no fixed moments");
  std::map<MultiIndex, double> out;
  for (const auto& k : enumerate_basis(n_states, max_deg)) {
    double v = 1.0;
    if (bc.kind == BoundaryCondition::Kind::Dirac) {
      for (int i = 0; i < n_states; ++i)
        for (int e = 0; e < k.exponents[i]; ++e) v *= bc.point[i];
    } else {
      for (int i = 0; i < n_states; ++i) {
        int e = k.exponents[i];
        double lo = bc.lo[i], hi = bc.hi[i];
        // normalized interval moment int x^e dx / (hi - lo)
        double num = std::pow(hi, e + 1) - std::pow(lo, e + 1);
        v *= num / ((e + 1) * (hi - lo));
      }
    }
    out.emplace(k, v);
  }
  return out;
}

MomentRow liouville_row(const MultiIndex& v, const ImpulsiveOCP& ocp, const MomentProblem& mp,
                        const BuildOptions& opts) {
  const int nv = ocp.n_vars();
  MomentRow row;
  row.test_degree = v.degree();
  const int t_exp = v.exponents[0];
  const MultiIndex xb = state_part(v);

  const int mu = mp.find_measure({MeasureId::Tag::Occupation, -1});
  const int mu0 = mp.find_measure({MeasureId::Tag::Initial, -1});
  const int muT = mp.find_measure({MeasureId::Tag::Terminal, -1});

  // terminal term (+)
  if (muT >= 0) {
    if (mp.measures[muT].includes_time)
      add_term(row, muT, v, 1.0);
    else
      add_term(row, muT, xb, 1.0);  // scaled final time t = 1
  } else {
    auto m = boundary_moments(ocp.terminal, ocp.n_states, xb.degree());
    row.rhs -= m.at(xb);
  }

  // initial term (-); t = 0 kills every test monomial with a time factor
  if (t_exp == 0) {
    if (mu0 >= 0) {
      add_term(row, mu0, xb, -1.0);
    } else {
      auto m = boundary_moments(ocp.initial, ocp.n_states, xb.degree());
      row.rhs += m.at(xb);
    }
  }

  // occupation term: dv/dt + grad_x(v) . f
  Polynomial vpoly = Polynomial::monomial(1.0, v);
  Polynomial q = vpoly.differentiate(0);
  std::vector<Polynomial> dv_dx;
  dv_dx.reserve(ocp.n_states);
  for (int i = 0; i < ocp.n_states; ++i) {
    dv_dx.push_back(vpoly.differentiate(i + 1));
    q += ocp.dynamics[i] * dv_dx[i];
  }
  for (const auto& [k, c] : q.terms()) add_term(row, mu, k, -c);

  // control terms: grad_x(v) . G per channel
  for (int c = 0; c < ocp.m_controls; ++c) {
    Polynomial g(nv);
    for (int i = 0; i < ocp.n_states; ++i) g += ocp.control_matrix[i][c] * dv_dx[i];
    if (g.is_zero()) continue;
    if (ocp.control_mode == ControlMode::SignedMeasure) {
      int np = mp.find_measure({MeasureId::Tag::NuPlus, c});
      int nm = mp.find_measure({MeasureId::Tag::NuMinus, c});
      for (const auto& [k, gc] : g.terms()) {
        add_term(row, np, k, -gc);
        add_term(row, nm, k, gc);
      }
    } else {
      for (size_t i = 0; i < ocp.control_values.size(); ++i) {
        int ni = mp.find_measure({MeasureId::Tag::NuDiscrete, static_cast<int>(i)});
        double u = ocp.control_values[i][c];
        for (const auto& [k, gc] : g.terms()) add_term(row, ni, k, -u * gc);
      }
    }
  }
  (void)opts;
  update_max_degree(row);
  return row;
}

MomentRow tv_row(double bound, const MomentProblem& mp) {
  MomentRow row;
  row.rhs = bound;
  for (size_t i = 0; i < mp.measures.size(); ++i) {
    const auto& m = mp.measures[i];
    if (m.id.tag == MeasureId::Tag::NuPlus || m.id.tag == MeasureId::Tag::NuMinus)
      add_term(row, static_cast<int>(i), MultiIndex::zero(m.n_vars), 1.0);
    if (m.id.tag == MeasureId::Tag::Slack)
      add_term(row, static_cast<int>(i), MultiIndex(), 1.0);
  }
  update_max_degree(row);
  return row;
}

std::vector<MomentRow> discrete_control_rows(const ImpulsiveOCP& ocp, const MomentProblem& mp,
                                             int order) {
  if (ocp.control_values.empty())
    throw std::invalid_argument("discrete_control_rows: empty control set");
  std::vector<MomentRow> rows;
  const int mu = mp.find_measure({MeasureId::Tag::Occupation, -1});
  // Unit conditional probability of choosing some control value: the choice
  // measures sum to the occupation measure. Truncated against the test
  // monomials t^a x^b with x-degree at most one that fit within degree 2d.
  for (const auto& w : enumerate_basis(ocp.n_vars(), 2 * order)) {
    if (w.degree() - w.exponents[0] > 1) continue;
    MomentRow row;
    row.test_degree = w.degree() + (w.degree() < 2 * order ? 1 : 0);
    for (size_t i = 0; i < ocp.control_values.size(); ++i) {
      int ni = mp.find_measure({MeasureId::Tag::NuDiscrete, static_cast<int>(i)});
      add_term(row, ni, w, 1.0);
    }
    add_term(row, mu, w, -1.0);
    update_max_degree(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

MomentProblem build(const ImpulsiveOCP& ocp, int order, const BuildOptions& opts) {
  auto diags = validate(ocp);
  if (has_errors(diags)) {
    std::string msg = "build: invalid problem:";
    for (const auto& d : diags)
      if (d.severity == Diagnostic::Severity::Error) msg += " [" + d.message + "]";
    throw std::invalid_argument(msg);
  }

  MomentProblem mp;
  mp.build_order = order;
  const int nv = ocp.n_vars();

  auto state_support = ocp.state_set.inequalities;

  mp.measures.push_back(
      {{MeasureId::Tag::Occupation, -1}, "mu", nv, true, state_support});
  if (ocp.control_mode == ControlMode::SignedMeasure) {
    for (int c = 0; c < ocp.m_controls; ++c) {
      std::string suffix = ocp.m_controls > 1 ? std::to_string(c + 1) : "";
      mp.measures.push_back(
          {{MeasureId::Tag::NuPlus, c}, "nu" + suffix + "+", nv, true, state_support});
      mp.measures.push_back(
          {{MeasureId::Tag::NuMinus, c}, "nu" + suffix + "-", nv, true, state_support});
    }
  } else {
    for (size_t i = 0; i < ocp.control_values.size(); ++i)
      mp.measures.push_back({{MeasureId::Tag::NuDiscrete, static_cast<int>(i)},
                             "nu_" + std::to_string(i + 1), nv, true, state_support});
  }

  const bool free_initial = ocp.initial.kind == BoundaryCondition::Kind::Free;
  const bool free_terminal = ocp.terminal.kind == BoundaryCondition::Kind::Free;
  if (free_initial || opts.pin_boundary_measures) {
    std::vector<Polynomial> gens;
    if (!ocp.initial_set.inequalities.empty())
      gens = eliminate_time(ocp.initial_set, 0.0).inequalities;
    else if (free_initial)
      gens = ocp.initial.set.inequalities;  // already over the state variables
    mp.measures.push_back({{MeasureId::Tag::Initial, -1}, "mu0", ocp.n_states, false, gens});
  }
  if (free_terminal || ocp.free_final_time || opts.pin_boundary_measures) {
    if (ocp.free_final_time) {
      // terminal time lives on [0, 1] x X_T; dirac targets become equality pairs
      std::vector<Polynomial> gens = ocp.terminal_set.inequalities;
      if (ocp.terminal.kind == BoundaryCondition::Kind::Dirac) {
        for (int i = 0; i < ocp.n_states; ++i) {
          Polynomial xi = Polynomial::variable(nv, i + 1);
          Polynomial pi = Polynomial::constant(nv, ocp.terminal.point[i]);
          gens.push_back(xi - pi);
          gens.push_back(pi - xi);
        }
      }
      mp.measures.push_back({{MeasureId::Tag::Terminal, -1}, "muT", nv, true, gens});
    } else {
      SemialgebraicSet sT = eliminate_time(ocp.terminal_set, 1.0);
      std::vector<Polynomial> gens = sT.inequalities;
      if (opts.pin_boundary_measures && ocp.terminal.kind == BoundaryCondition::Kind::Dirac) {
        // pinned dirac keeps an explicit singleton description
        for (int i = 0; i < ocp.n_states; ++i) {
          Polynomial xi = Polynomial::variable(ocp.n_states, i);
          Polynomial pi = Polynomial::constant(ocp.n_states, ocp.terminal.point[i]);
          gens.push_back(xi - pi);
          gens.push_back(pi - xi);
        }
      }
      mp.measures.push_back(
          {{MeasureId::Tag::Terminal, -1}, "muT", ocp.n_states, false, gens});
    }
  }
  if (ocp.tv_bound.has_value())
    mp.measures.push_back({{MeasureId::Tag::Slack, -1}, "tv_slack", 0, false, {}});

  // Liouville rows; rows whose dynamics lift past degree 2d are dropped
  for (const auto& v : enumerate_basis(nv, 2 * order)) {
    MomentRow row = liouville_row(v, ocp, mp, opts);
    if (row.terms.empty() && row.rhs == 0.0) continue;  // trivial test function
    if (row.max_moment_degree <= 2 * order) mp.rows.push_back(std::move(row));
  }

  if (ocp.tv_bound.has_value()) mp.rows.push_back(tv_row(*ocp.tv_bound, mp));

  if (ocp.control_mode == ControlMode::DiscreteSet)
    for (auto& row : discrete_control_rows(ocp, mp, order)) mp.rows.push_back(std::move(row));

  if (free_initial) {
    // the initial distribution is a probability measure
    MomentRow mass;
    mass.rhs = 1.0;
    add_term(mass, mp.find_measure({MeasureId::Tag::Initial, -1}),
             MultiIndex::zero(ocp.n_states), 1.0);
    mp.rows.push_back(std::move(mass));
  }

  if (opts.pin_boundary_measures) {
    auto pin = [&](MeasureId::Tag tag, const BoundaryCondition& bc) {
      if (bc.kind == BoundaryCondition::Kind::Free) return;
      int idx = mp.find_measure({tag, -1});
      auto fixed = boundary_moments(bc, ocp.n_states, 2 * order);
      for (const auto& [k, val] : fixed) {
        MomentRow row;
        row.test_degree = k.degree();
        add_term(row, idx, k, 1.0);
        row.rhs = val;
        update_max_degree(row);
        mp.rows.push_back(std::move(row));
      }
    };
    pin(MeasureId::Tag::Initial, ocp.initial);
    if (!ocp.free_final_time) pin(MeasureId::Tag::Terminal, ocp.terminal);
  }

  // cost: int h dmu + control-cost terms + int h_T dmuT
  const int mu = mp.find_measure({MeasureId::Tag::Occupation, -1});
  auto add_cost = [&](int measure, const MultiIndex& k, double coeff) {
    if (coeff == 0.0 || measure < 0) return;
    for (auto& t : mp.cost)
      if (t.measure == measure && t.index == k) {
        t.coeff += coeff;
        return;
      }
    mp.cost.push_back({measure, k, coeff});
  };
  for (const auto& [k, c] : ocp.running_cost.terms()) add_cost(mu, k, c);

  for (int c = 0; c < ocp.m_controls; ++c) {
    const Polynomial& H = ocp.control_cost[c];
    if (H.is_zero()) continue;
    if (ocp.control_mode == ControlMode::SignedMeasure) {
      int np = mp.find_measure({MeasureId::Tag::NuPlus, c});
      int nm = mp.find_measure({MeasureId::Tag::NuMinus, c});
      for (const auto& [k, hc] : H.terms()) {
        add_cost(np, k, hc);
        add_cost(nm, k, ocp.tv_cost ? hc : -hc);
      }
    } else {
      for (size_t i = 0; i < ocp.control_values.size(); ++i) {
        int ni = mp.find_measure({MeasureId::Tag::NuDiscrete, static_cast<int>(i)});
        double u = ocp.control_values[i][c];
        for (const auto& [k, hc] : H.terms()) add_cost(ni, k, u * hc);
      }
    }
  }

  if (!ocp.terminal_cost.is_zero()) {
    int muT = mp.find_measure({MeasureId::Tag::Terminal, -1});
    if (muT >= 0) {
      for (const auto& [k, c] : ocp.terminal_cost.terms()) {
        if (mp.measures[muT].includes_time)
          add_cost(muT, k, c);
        else
          add_cost(muT, state_part(k), c);  // t = 1 on the terminal slice
      }
    } else {
      auto m = boundary_moments(ocp.terminal, ocp.n_states, ocp.terminal_cost.degree());
      for (const auto& [k, c] : ocp.terminal_cost.terms())
        mp.cost_constant += c * m.at(state_part(k));
    }
  }

  return mp;
}

}  // namespace imoc
