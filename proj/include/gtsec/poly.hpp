#pragma once

#include <map>
#include <vector>

#include <Eigen/Dense>

namespace gtsec {

// Exponent vector over a fixed set of variables.  Ordering is graded
// lexicographic, so sorted ranges start at the constant and climb degree
// by degree.
struct Monomial {
  std::vector<int> exp;

  Monomial() = default;
  explicit Monomial(int vars) : exp(vars, 0) {}

  int vars() const { return static_cast<int>(exp.size()); }
  int degree() const;
  Monomial times(const Monomial& other) const;
  double eval(const Eigen::VectorXd& point) const;

  bool operator==(const Monomial& o) const { return exp == o.exp; }
  bool operator!=(const Monomial& o) const { return exp != o.exp; }
  bool operator<(const Monomial& o) const;
};

// Sparse polynomial with real coefficients.  Coefficients that cancel to
// exactly zero are dropped on the spot; nothing is rounded away, so the
// term list stays an honest record of the arithmetic that produced it.
class Polynomial {
 public:
  explicit Polynomial(int vars = 0) : vars_(vars) {}

  static Polynomial constant(int vars, double value);
  static Polynomial variable(int vars, int index);

  int vars() const { return vars_; }
  const std::map<Monomial, double>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  int degree() const;

  double coefficient(const Monomial& m) const;
  double constant_term() const;
  void add_term(const Monomial& m, double coeff);

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  Polynomial operator*(double s) const;

  // Product keeping only terms of total degree <= cap; cap < 0 keeps all.
  Polynomial times(const Polynomial& o, int cap = -1) const;
  Polynomial pow(int k, int cap = -1) const;
  Polynomial truncated(int cap) const;
  Polynomial derivative(int var) const;

  // Transplant into a wider variable space, variable i landing on slot[i].
  Polynomial remap(int new_vars, const std::vector<int>& slot) const;

  double eval(const Eigen::VectorXd& point) const;
  double max_abs_coeff() const;

 private:
  int vars_ = 0;
  std::map<Monomial, double> terms_;
};

// All monomials in the given variables up to max_degree, graded-lex
// sorted, constant first.
std::vector<Monomial> monomial_basis(int vars, int max_degree);

// Exact change of variables x_i = sum_j M(i, j) y_j; M has one row per old
// variable and one column per new one.  Degrees never grow.
Polynomial substitute_linear(const Polynomial& p, const Eigen::MatrixXd& M);

}  // namespace gtsec
