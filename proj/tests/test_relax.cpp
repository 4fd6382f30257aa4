#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "imoc/relax.hpp"

using namespace imoc;

namespace {

MultiIndex mi(std::vector<int> e) { return MultiIndex(std::move(e)); }

ImpulsiveOCP scaled_one_state() {
  ImpulsiveOCP p;
  p.n_states = 1;
  p.m_controls = 1;
  p.horizon = 2.0;
  p.dynamics = {Polynomial(2)};
  p.control_matrix = {{Polynomial::constant(2, 1.0)}};
  Polynomial x = Polynomial::variable(2, 1);
  p.running_cost = x * x;
  p.control_cost = {Polynomial(2)};
  p.terminal_cost = Polynomial(2);
  p.state_set.n_vars = 2;
  p.state_set.inequalities = {Polynomial::constant(2, 1.0) - x * x};
  p.initial.kind = BoundaryCondition::Kind::Dirac;
  p.initial.point = {1.0};
  p.terminal.kind = BoundaryCondition::Kind::Dirac;
  p.terminal.point = {0.5};
  p.state_lo = {-1.0};
  p.state_hi = {1.0};
  auto [scaled, map] = scale(p);
  return scaled;
}

/// Evaluates an affine entry form on a full moment vector.
double eval_entry(const EntryForm& e, const std::vector<double>& y) {
  double v = e.constant;
  for (const auto& t : e.terms) v += t.coeff * y[t.var];
  return v;
}

}  // namespace

TEST_CASE("layout concatenates per-measure bases") {
  auto mp = build(scaled_one_state(), 2);
  auto layout = make_layout(mp, 2);
  // three measures over (t, x) truncated at degree 4: binom(2+4, 4) = 15 each
  REQUIRE(layout.per_measure.size() == 3);
  CHECK(layout.n_vars == 45);
  CHECK(layout.per_measure[1].offset == 15);
  CHECK(layout.var(1, mi({0, 0})) == 15);
  CHECK_THROWS(layout.var(0, mi({5, 0})));
}

TEST_CASE("slack measures carry a single moment variable") {
  auto scaled = scaled_one_state();
  scaled.tv_bound = 1.0;
  auto mp = build(scaled, 2);
  auto layout = make_layout(mp, 2);
  REQUIRE(layout.per_measure.size() == 4);
  CHECK(layout.per_measure.back().basis.size() == 1);
  CHECK(layout.n_vars == 46);
}

TEST_CASE("moment matrix entries address the summed index") {
  auto mp = build(scaled_one_state(), 2);
  auto layout = make_layout(mp, 2);
  auto M = moment_matrix(mp, layout, 0, 2);
  CHECK(M.side == 6);  // basis of degree <= 2 in two variables

  // entry (r, c) is the moment of the product of basis monomials
  auto basis = enumerate_basis(2, 2);
  for (int r = 0; r < M.side; ++r)
    for (int c = r; c < M.side; ++c) {
      const auto& e = M.at(r, c);
      REQUIRE(e.terms.size() == 1);
      CHECK(e.terms[0].var == layout.var(0, basis[r] + basis[c]));
      CHECK(e.terms[0].coeff == doctest::Approx(1.0));
    }
}

TEST_CASE("localizing matrix applies the generator as a shift") {
  auto mp = build(scaled_one_state(), 2);
  auto layout = make_layout(mp, 2);
  Polynomial x = Polynomial::variable(2, 1);
  Polynomial g = Polynomial::constant(2, 1.0) - x * x;
  auto L = localizing_matrix(mp, layout, 0, g, 2);
  CHECK(L.side == 3);  // order 2 - 1 = 1

  // entry (0, 0): y_0 - y_{x^2}
  const auto& e = L.at(0, 0);
  REQUIRE(e.terms.size() == 2);
  double c0 = 0.0, c2 = 0.0;
  for (const auto& t : e.terms) {
    if (t.var == layout.var(0, mi({0, 0}))) c0 = t.coeff;
    if (t.var == layout.var(0, mi({0, 2}))) c2 = t.coeff;
  }
  CHECK(c0 == doctest::Approx(1.0));
  CHECK(c2 == doctest::Approx(-1.0));

  // a degree-5 generator does not fit at order 2
  Polynomial big = x * x * x * x * x;
  CHECK_THROWS(localizing_matrix(mp, layout, 0, big, 2));
}

TEST_CASE("localizing entries agree with direct integration for a known measure") {
  // measure: Lebesgue on t in [0, 1] times dirac at x = 1/2; generator 1 - x^2
  auto mp = build(scaled_one_state(), 2);
  auto layout = make_layout(mp, 2);
  std::vector<double> y(layout.n_vars, 0.0);
  const double xs = 0.5;
  for (const auto& k : enumerate_basis(2, 4))
    y[layout.var(0, k)] = std::pow(xs, k.exponents[1]) / (k.exponents[0] + 1);

  Polynomial x = Polynomial::variable(2, 1);
  Polynomial g = Polynomial::constant(2, 1.0) - x * x;
  auto L = localizing_matrix(mp, layout, 0, g, 2);
  auto basis = enumerate_basis(2, 1);
  for (int r = 0; r < L.side; ++r)
    for (int c = r; c < L.side; ++c) {
      // direct: int g(t,x) * m_r * m_c dmeasure
      Polynomial prod = g * Polynomial::monomial(1.0, basis[r] + basis[c]);
      double want = 0.0;
      for (const auto& [k, coeff] : prod.terms())
        want += coeff * std::pow(xs, k.exponents[1]) / (k.exponents[0] + 1);
      CHECK(eval_entry(L.at(r, c), y) == doctest::Approx(want));
    }
}

TEST_CASE("assembly truncates rows and routes cones") {
  auto scaled = scaled_one_state();
  scaled.tv_bound = 1.0;
  auto mp = build(scaled, 2);

  auto cp = assemble(mp, 2);
  CHECK(cp.order == 2);
  CHECK(cp.groups.size() == mp.measures.size());
  for (const auto& row : cp.equalities) CHECK(!row.terms.empty());
  // every unknown measure except the scalar slack gets a moment matrix
  int moment_matrices = 0;
  for (const auto& blk : cp.psd)
    if (!blk.generator) ++moment_matrices;
  CHECK(moment_matrices == 3);
  // the slack enters the scalar cone
  CHECK(!cp.nonneg.empty());

  // the first admissible order matches the generator degrees
  CHECK(first_order(mp) == 1);
  CHECK_THROWS(assemble(mp, 0));
  CHECK_THROWS(assemble(mp, 3));  // built for order 2 only
}

TEST_CASE("objective mirrors the transcription cost") {
  auto mp = build(scaled_one_state(), 2);
  auto cp = assemble(mp, 2);
  auto layout = cp.layout;
  // cost = int x^2 dmu, scaled by the horizon factor absorbed in scaling
  REQUIRE(cp.objective.size() == mp.cost.size());
  for (size_t i = 0; i < mp.cost.size(); ++i) {
    CHECK(cp.objective[i].var ==
          layout.var(mp.cost[i].measure, mp.cost[i].index));
    CHECK(cp.objective[i].coeff == doctest::Approx(mp.cost[i].coeff));
  }
  CHECK(cp.objective_constant == doctest::Approx(mp.cost_constant));
}
