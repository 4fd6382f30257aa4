#pragma once

#include <cstdint>
#include <map>
#include <vector>

namespace imoc {

/// Exponent vector of a monomial. Variable 0 is always time.
struct MultiIndex {
  std::vector<int> exponents;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> e) : exponents(std::move(e)) {}
  static MultiIndex zero(int n_vars) { return MultiIndex(std::vector<int>(n_vars, 0)); }

  int n_vars() const { return static_cast<int>(exponents.size()); }
  int degree() const;

  bool operator==(const MultiIndex& o) const { return exponents == o.exponents; }
  bool operator!=(const MultiIndex& o) const { return !(*this == o); }
  /// Graded lexicographic: lower degree first; within a degree,
  /// lexicographically greater exponent vector first (1, t, x, t^2, tx, x^2, ...).
  bool operator<(const MultiIndex& o) const;

  MultiIndex operator+(const MultiIndex& o) const;
};

/// All exponent vectors with n_vars variables and degree <= max_deg,
/// sorted graded-lex starting at the zero index.
std::vector<MultiIndex> enumerate_basis(int n_vars, int max_deg);

/// Sparse multivariate polynomial with real coefficients.
/// Zero coefficients are never stored.
class Polynomial {
 public:
  explicit Polynomial(int n_vars = 1) : n_vars_(n_vars) {}
  static Polynomial constant(int n_vars, double c);
  /// The monomial coeff * prod_i z_i^{e_i}.
  static Polynomial monomial(double coeff, MultiIndex k);
  /// coeff * z_var (degree-1 monomial).
  static Polynomial variable(int n_vars, int var, double coeff = 1.0);

  int n_vars() const { return n_vars_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  const std::map<MultiIndex, double>& terms() const { return terms_; }

  void add_term(const MultiIndex& k, double coeff);
  double coefficient(const MultiIndex& k) const;

  Polynomial operator+(const Polynomial& q) const;
  Polynomial operator-(const Polynomial& q) const;
  Polynomial operator*(const Polynomial& q) const;
  Polynomial operator*(double s) const;
  Polynomial& operator+=(const Polynomial& q);

  double evaluate(const std::vector<double>& point) const;

  /// Exact partial derivative with respect to variable `var`.
  Polynomial differentiate(int var) const;

  /// Substitute variable `var` by the affine expression a*z_var + b
  /// (z_var keeps its slot; used for scaling maps).
  Polynomial substitute_affine(int var, double a, double b) const;

  /// Fix variable `var` to a constant and drop it from the variable list.
  Polynomial eliminate(int var, double value) const;

  bool operator==(const Polynomial& q) const {
    return n_vars_ == q.n_vars_ && terms_ == q.terms_;
  }

 private:
  int n_vars_;
  std::map<MultiIndex, double> terms_;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

}  // namespace imoc
