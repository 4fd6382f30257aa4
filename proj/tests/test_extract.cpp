#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "imoc/extract.hpp"
#include "imoc/hierarchy.hpp"

using namespace imoc;

namespace {

MultiIndex mi(std::vector<int> e) { return MultiIndex(std::move(e)); }

std::vector<double> atom_moments(const std::vector<std::pair<double, double>>& atoms,
                                 int n_moments) {
  std::vector<double> m(n_moments, 0.0);
  for (int k = 0; k < n_moments; ++k)
    for (const auto& [loc, w] : atoms) m[k] += w * std::pow(loc, k);
  return m;
}

}  // namespace

TEST_CASE("marginal keeps only the requested variables") {
  MomentVector y;
  y.measure = 0;
  y.values[mi({0, 0})] = 1.0;
  y.values[mi({1, 0})] = 0.5;
  y.values[mi({0, 1})] = 0.25;
  y.values[mi({1, 1})] = 0.125;
  y.values[mi({2, 0})] = 1.0 / 3.0;

  auto t_only = marginal(y, {0});
  CHECK(t_only.size() == 3);
  CHECK(t_only.at(mi({1, 0})) == doctest::Approx(0.5));
  CHECK(t_only.count(mi({0, 1})) == 0);

  auto x_only = marginal(y, {1});
  CHECK(x_only.size() == 2);
  CHECK(x_only.at(mi({0, 1})) == doctest::Approx(0.25));
}

TEST_CASE("time marginal reads consecutive time powers") {
  MomentVector y;
  y.measure = 0;
  y.values[mi({0, 0})] = 2.0;
  y.values[mi({1, 0})] = 2.0;
  y.values[mi({2, 0})] = 8.0 / 3.0;
  y.values[mi({0, 1})] = 7.0;  // not a time power
  auto m = time_marginal(y, 2);
  REQUIRE(m.size() == 3);
  CHECK(m[0] == doctest::Approx(2.0));
  CHECK(m[2] == doctest::Approx(8.0 / 3.0));
}

TEST_CASE("single-atom reconstructions") {
  SUBCASE("atom at 2 with weight 1/4") {
    auto am = atoms_from_moments({0.25, 0.5, 1.0}, 1);
    REQUIRE(am.atoms.size() == 1);
    CHECK(am.atoms[0].location == doctest::Approx(2.0));
    CHECK(am.atoms[0].weight == doctest::Approx(0.25));
    CHECK(am.residual < 1e-12);
  }
  SUBCASE("atom at the origin") {
    auto am = atoms_from_moments({0.75, 0.0, 0.0}, 1);
    REQUIRE(am.atoms.size() == 1);
    CHECK(am.atoms[0].location == doctest::Approx(0.0));
    CHECK(am.atoms[0].weight == doctest::Approx(0.75));
  }
}

TEST_CASE("two-atom reconstruction") {
  auto am = atoms_from_moments({2.0, 2.0, 4.0, 8.0}, 2);
  REQUIRE(am.atoms.size() == 2);
  CHECK(am.atoms[0].location == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(am.atoms[1].location == doctest::Approx(2.0));
  CHECK(am.atoms[0].weight == doctest::Approx(1.0));
  CHECK(am.atoms[1].weight == doctest::Approx(1.0));
  CHECK(am.residual < 1e-9);
}

TEST_CASE("flat rank detection") {
  SUBCASE("a single atom is flat at rank one") {
    auto m = atom_moments({{0.5, 1.0}}, 5);
    auto r = flat_rank(m, 1e-3);
    REQUIRE(r.has_value());
    CHECK(*r == 1);
  }
  SUBCASE("three atoms are flat at rank three") {
    auto m = atom_moments({{0.1, 0.5}, {0.6, 1.0}, {0.9, 0.25}}, 9);
    auto r = flat_rank(m, 1e-3);
    REQUIRE(r.has_value());
    CHECK(*r == 3);
  }
  SUBCASE("an absolutely continuous measure is not flat at a tight tolerance") {
    // Lebesgue on [0, 1]: moments 1/(k+1). The Hankels are Hilbert matrices,
    // mathematically full-rank but with singular values decaying so fast
    // (sigma_4 / sigma_1 ~ 6e-5 for the 4x4) that a loose cutoff sees an
    // apparent rank plateau; a cutoff below that decay resolves the full rank
    std::vector<double> m;
    for (int k = 0; k <= 6; ++k) m.push_back(1.0 / (k + 1));
    CHECK_FALSE(flat_rank(m, 1e-5).has_value());
    auto loose = flat_rank(m, 1e-3);
    REQUIRE(loose.has_value());
    CHECK(*loose == 3);
  }
  SUBCASE("too few moments") {
    CHECK_FALSE(flat_rank({1.0, 0.5}, 1e-3).has_value());
  }
}

TEST_CASE("reconstruction residual is tiny for exact moments") {
  auto m = atom_moments({{0.2, 0.3}, {0.8, 0.7}}, 8);
  auto am = atoms_from_moments(m, 2);
  REQUIRE(am.atoms.size() == 2);
  CHECK(am.residual < 1e-12);
}

TEST_CASE("end-to-end identification on the budgeted basic problem") {
  // at the second relaxation the control measure is atomic: an impulse of
  // -3/4 at t = 0 and +1/4 at t = 2
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
  p.tv_bound = 1.0;

  auto [scaled, map] = scale(p);
  auto mp = build(scaled, 2);
  auto cp = assemble(mp, 2);
  auto r = solve_program(mp, cp);
  REQUIRE((r.status == RelaxStatus::Optimal || r.status == RelaxStatus::Inaccurate));

  auto plan = identify_controls(r, mp, scaled, map, {});
  CHECK_FALSE(plan.non_atomic);
  REQUIRE(plan.channels.size() == 1);
  REQUIRE(plan.channels[0].size() == 2);
  CHECK(plan.channels[0][0].time == doctest::Approx(0.0).epsilon(1e-4));
  CHECK(plan.channels[0][0].amplitude == doctest::Approx(-0.75).epsilon(1e-3));
  CHECK(plan.channels[0][1].time == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(plan.channels[0][1].amplitude == doctest::Approx(0.25).epsilon(1e-3));
}
