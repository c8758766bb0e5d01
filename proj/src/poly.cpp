#include "gtsec/poly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gtsec {

int Monomial::degree() const {
  return std::accumulate(exp.begin(), exp.end(), 0);
}

Monomial Monomial::times(const Monomial& other) const {
  if (exp.size() != other.exp.size())
    throw std::invalid_argument("monomial variable counts differ");
  Monomial r(vars());
  for (std::size_t i = 0; i < exp.size(); ++i) r.exp[i] = exp[i] + other.exp[i];
  return r;
}

double Monomial::eval(const Eigen::VectorXd& point) const {
  if (point.size() != static_cast<Eigen::Index>(exp.size()))
    throw std::invalid_argument("point dimension does not match monomial");
  double v = 1.0;
  for (std::size_t i = 0; i < exp.size(); ++i)
    for (int k = 0; k < exp[i]; ++k) v *= point[static_cast<Eigen::Index>(i)];
  return v;
}

bool Monomial::operator<(const Monomial& o) const {
  const int da = degree(), db = o.degree();
  if (da != db) return da < db;
  return std::lexicographical_compare(exp.begin(), exp.end(), o.exp.begin(),
                                      o.exp.end());
}

Polynomial Polynomial::constant(int vars, double value) {
  Polynomial p(vars);
  p.add_term(Monomial(vars), value);
  return p;
}

Polynomial Polynomial::variable(int vars, int index) {
  if (index < 0 || index >= vars)
    throw std::invalid_argument("variable index out of range");
  Polynomial p(vars);
  Monomial m(vars);
  m.exp[index] = 1;
  p.add_term(m, 1.0);
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

double Polynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::constant_term() const { return coefficient(Monomial(vars_)); }

void Polynomial::add_term(const Monomial& m, double coeff) {
  if (m.vars() != vars_)
    throw std::invalid_argument("monomial variable count does not match polynomial");
  auto [it, inserted] = terms_.emplace(m, coeff);
  if (!inserted) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  } else if (coeff == 0.0) {
    terms_.erase(it);
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (vars_ != o.vars_) throw std::invalid_argument("variable counts differ");
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (vars_ != o.vars_) throw std::invalid_argument("variable counts differ");
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial r(vars_);
  if (s == 0.0) return r;
  for (const auto& [m, c] : terms_) r.terms_.emplace(m, c * s);
  return r;
}

Polynomial Polynomial::times(const Polynomial& o, int cap) const {
  if (vars_ != o.vars_) throw std::invalid_argument("variable counts differ");
  Polynomial r(vars_);
  for (const auto& [ma, ca] : terms_) {
    const int da = ma.degree();
    for (const auto& [mb, cb] : o.terms_) {
      if (cap >= 0 && da + mb.degree() > cap) continue;
      r.add_term(ma.times(mb), ca * cb);
    }
  }
  return r;
}

Polynomial Polynomial::pow(int k, int cap) const {
  if (k < 0) throw std::invalid_argument("negative power");
  Polynomial r = constant(vars_, 1.0);
  for (int i = 0; i < k; ++i) r = r.times(*this, cap);
  return r;
}

Polynomial Polynomial::truncated(int cap) const {
  Polynomial r(vars_);
  for (const auto& [m, c] : terms_)
    if (m.degree() <= cap) r.terms_.emplace(m, c);
  return r;
}

Polynomial Polynomial::derivative(int var) const {
  if (var < 0 || var >= vars_) throw std::invalid_argument("variable index out of range");
  Polynomial r(vars_);
  for (const auto& [m, c] : terms_) {
    if (m.exp[var] == 0) continue;
    Monomial d = m;
    d.exp[var] -= 1;
    r.add_term(d, c * m.exp[var]);
  }
  return r;
}

Polynomial Polynomial::remap(int new_vars, const std::vector<int>& slot) const {
  if (static_cast<int>(slot.size()) != vars_)
    throw std::invalid_argument("slot list must name one target per variable");
  for (int s : slot)
    if (s < 0 || s >= new_vars) throw std::invalid_argument("slot out of range");
  Polynomial r(new_vars);
  for (const auto& [m, c] : terms_) {
    Monomial t(new_vars);
    for (int i = 0; i < vars_; ++i) t.exp[slot[i]] += m.exp[i];
    r.add_term(t, c);
  }
  return r;
}

double Polynomial::eval(const Eigen::VectorXd& point) const {
  double v = 0.0;
  for (const auto& [m, c] : terms_) v += c * m.eval(point);
  return v;
}

double Polynomial::max_abs_coeff() const {
  double v = 0.0;
  for (const auto& [m, c] : terms_) v = std::max(v, std::abs(c));
  return v;
}

namespace {
void fill_basis(int var, int remaining, Monomial& cur, std::vector<Monomial>& out) {
  if (var == cur.vars()) {
    out.push_back(cur);
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    cur.exp[var] = e;
    fill_basis(var + 1, remaining - e, cur, out);
  }
  cur.exp[var] = 0;
}
}  // namespace

std::vector<Monomial> monomial_basis(int vars, int max_degree) {
  if (vars <= 0 || max_degree < 0)
    throw std::invalid_argument("basis needs at least one variable and degree >= 0");
  std::vector<Monomial> out;
  Monomial cur(vars);
  fill_basis(0, max_degree, cur, out);
  std::sort(out.begin(), out.end());
  return out;
}

Polynomial substitute_linear(const Polynomial& p, const Eigen::MatrixXd& M) {
  if (M.rows() != p.vars())
    throw std::invalid_argument("substitution needs one row per variable");
  const int nv = static_cast<int>(M.cols());
  std::vector<Polynomial> images(static_cast<std::size_t>(p.vars()), Polynomial(nv));
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Polynomial img(nv);
    for (int j = 0; j < nv; ++j) {
      if (M(i, j) == 0.0) continue;
      img += Polynomial::variable(nv, j) * M(i, j);
    }
    images[static_cast<std::size_t>(i)] = img;
  }
  Polynomial out(nv);
  for (const auto& [m, c] : p.terms()) {
    Polynomial term = Polynomial::constant(nv, c);
    for (int v = 0; v < m.vars(); ++v) {
      const int e = m.exp[static_cast<std::size_t>(v)];
      if (e > 0) term = term.times(images[static_cast<std::size_t>(v)].pow(e));
    }
    out += term;
  }
  return out;
}

}  // namespace gtsec
