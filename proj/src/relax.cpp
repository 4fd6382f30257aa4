#include "imoc/relax.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace imoc {

namespace {

int packed_index(int side, int r, int c) {
  // upper triangle, row-major
  return r * side - r * (r - 1) / 2 + (c - r);
}

void add_entry_term(EntryForm& e, int var, double coeff) {
  if (coeff == 0.0) return;
  for (auto& t : e.terms)
    if (t.var == var) {
      t.coeff += coeff;
      return;
    }
  e.terms.push_back({var, coeff});
}

}  // namespace

const EntryForm& MatrixStructure::at(int r, int c) const {
  if (r > c) std::swap(r, c);
  return entries[packed_index(side, r, c)];
}

EntryForm& MatrixStructure::at(int r, int c) {
  if (r > c) std::swap(r, c);
  return entries[packed_index(side, r, c)];
}

int VariableLayout::var(int measure, const MultiIndex& k) const {
  const auto& mv = per_measure[measure];
  auto it = mv.position.find(k);
  if (it == mv.position.end()) throw std::out_of_range("layout: moment outside truncation");
  return it->second;
}

std::string to_string(RelaxStatus s) {
  switch (s) {
    case RelaxStatus::Optimal: return "optimal";
    case RelaxStatus::PrimalInfeasible: return "infeasible";
    case RelaxStatus::DualInfeasible: return "unbounded";
    case RelaxStatus::Inaccurate: return "inaccurate";
    case RelaxStatus::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

int first_order(const MomentProblem& mp) {
  int d = 1;
  for (const auto& t : mp.cost) d = std::max(d, (t.index.degree() + 1) / 2);
  for (const auto& m : mp.measures)
    for (const auto& a : m.support) d = std::max(d, (a.degree() + 1) / 2);
  return d;
}

VariableLayout make_layout(const MomentProblem& mp, int order) {
  VariableLayout layout;
  int offset = 0;
  for (const auto& m : mp.measures) {
    VariableLayout::MeasureVars mv;
    mv.offset = offset;
    if (m.id.tag == MeasureId::Tag::Slack) {
      mv.basis = {MultiIndex()};
    } else {
      mv.basis = enumerate_basis(m.n_vars, 2 * order);
    }
    for (size_t i = 0; i < mv.basis.size(); ++i)
      mv.position.emplace(mv.basis[i], offset + static_cast<int>(i));
    offset += static_cast<int>(mv.basis.size());
    layout.per_measure.push_back(std::move(mv));
  }
  layout.n_vars = offset;
  return layout;
}

MatrixStructure moment_matrix(const MomentProblem& mp, const VariableLayout& layout, int owner,
                              int order) {
  return localizing_matrix(mp, layout, owner,
                           Polynomial::constant(mp.measures[owner].n_vars, 1.0),
                           order);
}

MatrixStructure localizing_matrix(const MomentProblem& mp, const VariableLayout& layout,
                                  int owner, const Polynomial& a, int d) {
  const auto& m = mp.measures[owner];
  const int half = (a.degree() + 1) / 2;
  const int order = d - half;
  if (order < 0) throw std::invalid_argument("localizing_matrix: generator degree exceeds 2d");

  MatrixStructure ms;
  ms.owner = owner;
  ms.order = order;
  if (a.degree() > 0 || a.coefficient(MultiIndex::zero(m.n_vars)) != 1.0 ||
      a.terms().size() != 1)
    ms.generator = a;

  auto basis = enumerate_basis(m.n_vars, order);
  ms.side = static_cast<int>(basis.size());
  ms.entries.resize(ms.side * (ms.side + 1) / 2);
  for (int r = 0; r < ms.side; ++r)
    for (int c = r; c < ms.side; ++c) {
      EntryForm& e = ms.at(r, c);
      MultiIndex base = basis[r] + basis[c];
      for (const auto& [k, coeff] : a.terms())
        add_entry_term(e, layout.var(owner, base + k), coeff);
    }
  return ms;
}

ConicProgram assemble(const MomentProblem& mp, int d) {
  if (d < first_order(mp))
    throw std::invalid_argument("assemble: order below the first relaxation order");
  if (d > mp.build_order)
    throw std::invalid_argument("assemble: moment problem was built for a lower order");

  ConicProgram cp;
  cp.order = d;
  cp.layout = make_layout(mp, d);
  for (const auto& mv : cp.layout.per_measure)
    cp.groups.emplace_back(mv.offset, static_cast<int>(mv.basis.size()));

  for (const auto& row : mp.rows) {
    if (row.test_degree > 2 * d || row.max_moment_degree > 2 * d) continue;
    SparseRow r;
    r.rhs = row.rhs;
    for (const auto& t : row.terms)
      r.terms.push_back({cp.layout.var(t.measure, t.index), t.coeff});
    cp.equalities.push_back(std::move(r));
  }

  for (size_t mi = 0; mi < mp.measures.size(); ++mi) {
    const auto& m = mp.measures[mi];
    if (m.id.tag == MeasureId::Tag::Slack) {
      EntryForm e;
      add_entry_term(e, cp.layout.per_measure[mi].offset, 1.0);
      cp.nonneg.push_back(std::move(e));
      continue;
    }

    std::vector<Polynomial> generators = m.support;
    const int n_state_vars = m.includes_time ? m.n_vars - 1 : m.n_vars;
    if (m.includes_time) {
      // time-interval generators t >= 0 and 1 - t >= 0 on the scaled horizon
      Polynomial t = Polynomial::variable(m.n_vars, 0);
      generators.push_back(t);
      generators.push_back(Polynomial::constant(m.n_vars, 1.0) - t);
    }
    if (n_state_vars > 0) {
      // redundant ball generator activating the compactness condition
      Polynomial ball = Polynomial::constant(m.n_vars, static_cast<double>(n_state_vars));
      for (int i = 0; i < n_state_vars; ++i) {
        int var = m.includes_time ? i + 1 : i;
        Polynomial xi = Polynomial::variable(m.n_vars, var);
        ball = ball - xi * xi;
      }
      bool present = false;
      for (const auto& g : m.support)
        if (g == ball) present = true;
      if (!present) generators.push_back(ball);
    }

    auto push = [&](MatrixStructure&& ms) {
      if (ms.side == 1)
        cp.nonneg.push_back(ms.entries[0]);
      else
        cp.psd.push_back(std::move(ms));
    };

    push(moment_matrix(mp, cp.layout, static_cast<int>(mi), d));
    for (const auto& a : generators) {
      if (a.is_zero()) continue;
      if ((a.degree() + 1) / 2 > d) continue;  // not representable at this order
      push(localizing_matrix(mp, cp.layout, static_cast<int>(mi), a, d));
    }
  }

  for (const auto& t : mp.cost)
    cp.objective.push_back({cp.layout.var(t.measure, t.index), t.coeff});
  cp.objective_constant = mp.cost_constant;
  return cp;
}

}  // namespace imoc
