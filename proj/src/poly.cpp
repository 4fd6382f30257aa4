#include "imoc/poly.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace imoc {

namespace {
constexpr double kDropTol = 0.0;  // exact: only literal zeros are dropped
}

int MultiIndex::degree() const {
  int d = 0;
  for (int e : exponents) d += e;
  return d;
}

bool MultiIndex::operator<(const MultiIndex& o) const {
  assert(exponents.size() == o.exponents.size());
  int da = degree(), db = o.degree();
  if (da != db) return da < db;
  // within a degree, lexicographically greater vector comes first
  return exponents > o.exponents;
}

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
  assert(exponents.size() == o.exponents.size());
  MultiIndex r = *this;
  for (size_t i = 0; i < exponents.size(); ++i) r.exponents[i] += o.exponents[i];
  return r;
}

std::vector<MultiIndex> enumerate_basis(int n_vars, int max_deg) {
  if (n_vars < 1 || max_deg < 0) throw std::invalid_argument("enumerate_basis: bad arguments");
  std::vector<MultiIndex> out;
  std::vector<int> cur(n_vars, 0);
  // recursive graded enumeration: for each total degree, lex-descending
  auto rec = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == n_vars - 1) {
      cur[pos] = remaining;
      out.push_back(MultiIndex(cur));
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      cur[pos] = e;
      self(self, pos + 1, remaining - e);
    }
    cur[pos] = 0;
  };
  for (int deg = 0; deg <= max_deg; ++deg) rec(rec, 0, deg);
  return out;
}

Polynomial Polynomial::constant(int n_vars, double c) {
  Polynomial p(n_vars);
  p.add_term(MultiIndex::zero(n_vars), c);
  return p;
}

Polynomial Polynomial::monomial(double coeff, MultiIndex k) {
  Polynomial p(k.n_vars());
  p.add_term(k, coeff);
  return p;
}

Polynomial Polynomial::variable(int n_vars, int var, double coeff) {
  MultiIndex k = MultiIndex::zero(n_vars);
  k.exponents[var] = 1;
  return monomial(coeff, k);
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [k, c] : terms_) d = std::max(d, k.degree());
  return d;
}

void Polynomial::add_term(const MultiIndex& k, double coeff) {
  assert(k.n_vars() == n_vars_);
  if (coeff == kDropTol) return;
  auto it = terms_.find(k);
  if (it == terms_.end()) {
    terms_.emplace(k, coeff);
  } else {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::coefficient(const MultiIndex& k) const {
  auto it = terms_.find(k);
  return it == terms_.end() ? 0.0 : it->second;
}

Polynomial Polynomial::operator+(const Polynomial& q) const {
  Polynomial r = *this;
  r += q;
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& q) {
  assert(n_vars_ == q.n_vars_);
  for (const auto& [k, c] : q.terms_) add_term(k, c);
  return *this;
}

Polynomial Polynomial::operator-(const Polynomial& q) const {
  Polynomial r = *this;
  for (const auto& [k, c] : q.terms_) r.add_term(k, -c);
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& q) const {
  assert(n_vars_ == q.n_vars_);
  Polynomial r(n_vars_);
  for (const auto& [ka, ca] : terms_)
    for (const auto& [kb, cb] : q.terms_) r.add_term(ka + kb, ca * cb);
  return r;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial r(n_vars_);
  if (s == 0.0) return r;
  for (const auto& [k, c] : terms_) r.add_term(k, c * s);
  return r;
}

double Polynomial::evaluate(const std::vector<double>& point) const {
  assert(static_cast<int>(point.size()) == n_vars_);
  double total = 0.0;
  for (const auto& [k, c] : terms_) {
    double m = c;
    for (int i = 0; i < n_vars_; ++i)
      for (int e = 0; e < k.exponents[i]; ++e) m *= point[i];
    total += m;
  }
  return total;
}

Polynomial Polynomial::differentiate(int var) const {
  assert(var >= 0 && var < n_vars_);
  Polynomial r(n_vars_);
  for (const auto& [k, c] : terms_) {
    int e = k.exponents[var];
    if (e == 0) continue;
    MultiIndex kk = k;
    kk.exponents[var] = e - 1;
    r.add_term(kk, c * e);
  }
  return r;
}

Polynomial Polynomial::substitute_affine(int var, double a, double b) const {
  Polynomial r(n_vars_);
  Polynomial expr = Polynomial::variable(n_vars_, var, a) + Polynomial::constant(n_vars_, b);
  for (const auto& [k, c] : terms_) {
    MultiIndex base = k;
    int e = base.exponents[var];
    base.exponents[var] = 0;
    Polynomial term = Polynomial::monomial(c, base);
    for (int i = 0; i < e; ++i) term = term * expr;
    r += term;
  }
  return r;
}

Polynomial Polynomial::eliminate(int var, double value) const {
  assert(var >= 0 && var < n_vars_);
  Polynomial r(n_vars_ - 1);
  for (const auto& [k, c] : terms_) {
    double coeff = c;
    for (int e = 0; e < k.exponents[var]; ++e) coeff *= value;
    if (coeff == 0.0) continue;
    std::vector<int> e2;
    e2.reserve(n_vars_ - 1);
    for (int i = 0; i < n_vars_; ++i)
      if (i != var) e2.push_back(k.exponents[i]);
    r.add_term(MultiIndex(std::move(e2)), coeff);
  }
  return r;
}

}  // namespace imoc
