#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "imoc/poly.hpp"

using namespace imoc;

namespace {

MultiIndex mi(std::vector<int> e) { return MultiIndex(std::move(e)); }

}  // namespace

TEST_CASE("multi-index degree and comparison") {
  CHECK(mi({0, 0}).degree() == 0);
  CHECK(mi({2, 3}).degree() == 5);
  CHECK(MultiIndex::zero(3).degree() == 0);

  // graded ordering: lower total degree first
  CHECK(mi({0, 0}) < mi({1, 0}));
  CHECK(mi({1, 0}) < mi({0, 2}));
  // within a degree: lexicographically greater exponent vector first
  CHECK(mi({1, 0}) < mi({0, 1}));
  CHECK(mi({2, 0}) < mi({1, 1}));
  CHECK(mi({1, 1}) < mi({0, 2}));
  CHECK_FALSE(mi({0, 1}) < mi({1, 0}));
  CHECK(mi({1, 2}) + mi({3, 1}) == mi({4, 3}));
}

TEST_CASE("basis enumeration is graded-lex and complete") {
  auto b = enumerate_basis(2, 2);
  // 1, t, x, t^2, tx, x^2
  REQUIRE(b.size() == 6);
  CHECK(b[0] == mi({0, 0}));
  CHECK(b[1] == mi({1, 0}));
  CHECK(b[2] == mi({0, 1}));
  CHECK(b[3] == mi({2, 0}));
  CHECK(b[4] == mi({1, 1}));
  CHECK(b[5] == mi({0, 2}));

  // binomial(n + d, d) for n = 3, d = 4
  CHECK(enumerate_basis(3, 4).size() == 35);
  for (size_t i = 1; i < b.size(); ++i) CHECK(b[i - 1] < b[i]);
}

TEST_CASE("polynomial arithmetic") {
  Polynomial t = Polynomial::variable(2, 0);
  Polynomial x = Polynomial::variable(2, 1);
  Polynomial p = t * t + 2.0 * x - Polynomial::constant(2, 1.0);

  CHECK(p.degree() == 2);
  CHECK(p.coefficient(mi({2, 0})) == doctest::Approx(1.0));
  CHECK(p.coefficient(mi({0, 1})) == doctest::Approx(2.0));
  CHECK(p.coefficient(mi({0, 0})) == doctest::Approx(-1.0));
  CHECK(p.evaluate({3.0, 0.5}) == doctest::Approx(9.0 + 1.0 - 1.0));

  // cancellation never leaves zero coefficients behind
  Polynomial q = p - p;
  CHECK(q.is_zero());
  CHECK(q.terms().empty());

  Polynomial prod = (t + x) * (t - x);
  CHECK(prod.coefficient(mi({2, 0})) == doctest::Approx(1.0));
  CHECK(prod.coefficient(mi({0, 2})) == doctest::Approx(-1.0));
  CHECK(prod.coefficient(mi({1, 1})) == doctest::Approx(0.0));
}

TEST_CASE("differentiation") {
  Polynomial t = Polynomial::variable(2, 0);
  Polynomial x = Polynomial::variable(2, 1);
  Polynomial p = t * t * x + 3.0 * x;

  Polynomial pt = p.differentiate(0);
  CHECK(pt.coefficient(mi({1, 1})) == doctest::Approx(2.0));
  CHECK(pt.degree() == 2);

  Polynomial px = p.differentiate(1);
  CHECK(px.coefficient(mi({2, 0})) == doctest::Approx(1.0));
  CHECK(px.coefficient(mi({0, 0})) == doctest::Approx(3.0));

  CHECK(Polynomial::constant(2, 5.0).differentiate(0).is_zero());
}

TEST_CASE("affine substitution matches pointwise evaluation") {
  Polynomial t = Polynomial::variable(2, 0);
  Polynomial x = Polynomial::variable(2, 1);
  Polynomial p = t * t * x - 2.0 * t + x * x;

  // x -> 3 z + 1
  Polynomial q = p.substitute_affine(1, 3.0, 1.0);
  for (double tv : {0.0, 0.7, -1.3})
    for (double zv : {0.0, 0.4, -0.9})
      CHECK(q.evaluate({tv, zv}) == doctest::Approx(p.evaluate({tv, 3.0 * zv + 1.0})));
}

TEST_CASE("variable elimination") {
  Polynomial t = Polynomial::variable(3, 0);
  Polynomial x = Polynomial::variable(3, 1);
  Polynomial y = Polynomial::variable(3, 2);
  Polynomial p = t * x + y * y - 4.0 * t;

  Polynomial q = p.eliminate(0, 2.0);  // fix t = 2
  REQUIRE(q.n_vars() == 2);
  for (double xv : {0.0, 1.5})
    for (double yv : {-1.0, 2.0})
      CHECK(q.evaluate({xv, yv}) == doctest::Approx(p.evaluate({2.0, xv, yv})));
}
