#include "gtsec/sdp.hpp"

#include <stdexcept>

namespace gtsec {

int SdpVariables::mat_offset(int v) const {
  int off = 0;
  for (int i = 0; i < v; ++i) off += svec_size(mat_sizes[i]);
  return off;
}

int SdpVariables::scalar_offset(int s) const {
  return mat_offset(static_cast<int>(mat_sizes.size())) + s;
}

int SdpVariables::total() const { return scalar_offset(scalars); }

Eigen::MatrixXd SdpVariables::unpack(const Eigen::VectorXd& y, int v) const {
  const int p = mat_sizes[v];
  const int off = mat_offset(v);
  Eigen::MatrixXd m(p, p);
  for (int l = 0; l < p; ++l)
    for (int k = 0; k <= l; ++k) {
      const double val = y[off + svec_index(k, l)];
      m(k, l) = val;
      m(l, k) = val;
    }
  return m;
}

void SdpVariables::pack(const Eigen::MatrixXd& m, int v, Eigen::VectorXd& y) const {
  const int p = mat_sizes[v];
  const int off = mat_offset(v);
  for (int l = 0; l < p; ++l)
    for (int k = 0; k <= l; ++k) y[off + svec_index(k, l)] = m(k, l);
}

CongruenceBlock::CongruenceBlock(int size, Eigen::MatrixXd c0)
    : ConstraintBlock(size), c0_(std::move(c0)) {
  if (c0_.rows() != size || c0_.cols() != size)
    throw std::invalid_argument("constant term has the wrong size");
}

void CongruenceBlock::add_term(int mat_var, double sign, Eigen::MatrixXd g) {
  if (g.cols() != size_) throw std::invalid_argument("congruence factor has the wrong width");
  if (!terms_.empty() && terms_.front().var != mat_var)
    throw std::invalid_argument("a congruence block binds one matrix variable");
  terms_.push_back({mat_var, sign, std::move(g)});
}

void CongruenceBlock::add_scalar(int scalar, Eigen::MatrixXd d) {
  if (d.rows() != size_ || d.cols() != size_)
    throw std::invalid_argument("scalar coefficient has the wrong size");
  scalar_terms_.push_back({scalar, std::move(d)});
}

void CongruenceBlock::eval(const SdpVariables& vars, const Eigen::VectorXd& y,
                           Eigen::MatrixXd& x) const {
  x = c0_;
  if (!terms_.empty()) {
    const Eigen::MatrixXd p = vars.unpack(y, terms_.front().var);
    for (const Term& t : terms_) x.noalias() += t.sign * t.g.transpose() * p * t.g;
  }
  for (const ScalarTerm& s : scalar_terms_)
    x += y[vars.scalar_offset(s.scalar)] * s.d;
}

void CongruenceBlock::apply(const SdpVariables& vars, const Eigen::VectorXd& dy,
                           Eigen::MatrixXd& dx) const {
  dx.setZero(size_, size_);
  if (!terms_.empty()) {
    const Eigen::MatrixXd p = vars.unpack(dy, terms_.front().var);
    for (const Term& t : terms_) dx.noalias() += t.sign * t.g.transpose() * p * t.g;
  }
  for (const ScalarTerm& s : scalar_terms_)
    dx += dy[vars.scalar_offset(s.scalar)] * s.d;
}

void CongruenceBlock::accumulate_adjoint(const SdpVariables& vars,
                                         const Eigen::MatrixXd& m,
                                         Eigen::VectorXd& out) const {
  for (const Term& t : terms_) {
    const Eigen::MatrixXd phi = t.g * m * t.g.transpose();
    const int p = static_cast<int>(phi.rows());
    const int off = vars.mat_offset(t.var);
    for (int l = 0; l < p; ++l) {
      out[off + SdpVariables::svec_index(l, l)] += t.sign * phi(l, l);
      for (int k = 0; k < l; ++k)
        out[off + SdpVariables::svec_index(k, l)] += t.sign * 2.0 * phi(k, l);
    }
  }
  for (const ScalarTerm& s : scalar_terms_)
    out[vars.scalar_offset(s.scalar)] += s.d.cwiseProduct(m).sum();
}

namespace {

// <B_kl, U B_k'l' U'> for the unscaled symmetric basis; U need not be
// symmetric (it is G_t v G_t'' for a mixed term pair).
inline double basis_quad(const Eigen::MatrixXd& u, int k, int l, int kp, int lp) {
  if (k < l && kp < lp)
    return 2.0 * (u(l, kp) * u(k, lp) + u(k, kp) * u(l, lp));
  if (k == l && kp < lp) return 2.0 * u(k, kp) * u(k, lp);
  if (k < l && kp == lp) return 2.0 * u(l, kp) * u(k, kp);
  return u(k, kp) * u(k, kp);
}

}  // namespace

void CongruenceBlock::accumulate_schur(const SdpVariables& vars,
                                       const Eigen::MatrixXd& v,
                                       Eigen::MatrixXd& h) const {
  // Matrix-variable part: ordered term pairs collapse to unordered ones
  // through the transpose identity <B_i, U B_j U'> = <B_j, U' B_i U>.
  if (!terms_.empty()) {
    const int var = terms_.front().var;
    const int p = static_cast<int>(terms_.front().g.rows());
    const int off = vars.mat_offset(var);
    const int nsv = SdpVariables::svec_size(p);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(nsv, nsv);
    for (std::size_t a = 0; a < terms_.size(); ++a) {
      for (std::size_t b = a; b < terms_.size(); ++b) {
        const Eigen::MatrixXd u = terms_[a].g * v * terms_[b].g.transpose();
        const double sg = terms_[a].sign * terms_[b].sign;
        for (int l = 0; l < p; ++l)
          for (int k = 0; k <= l; ++k) {
            const int i = SdpVariables::svec_index(k, l);
            for (int lp = 0; lp < p; ++lp)
              for (int kp = 0; kp <= lp; ++kp) {
                const int j = SdpVariables::svec_index(kp, lp);
                const double val = sg * basis_quad(u, k, l, kp, lp);
                if (a == b) {
                  acc(i, j) += val;
                } else {
                  acc(i, j) += val;
                  acc(j, i) += val;
                }
              }
          }
      }
    }
    h.block(off, off, nsv, nsv) += acc;

    // Cross terms against the scalars of this block.
    for (const ScalarTerm& s : scalar_terms_) {
      const int soff = vars.scalar_offset(s.scalar);
      const Eigen::MatrixXd vdv = v * s.d * v;
      for (const Term& t : terms_) {
        const Eigen::MatrixXd phi = t.g * vdv * t.g.transpose();
        for (int l = 0; l < p; ++l)
          for (int k = 0; k <= l; ++k) {
            const double val =
                t.sign * (k == l ? phi(k, k) : 2.0 * phi(k, l));
            h(off + SdpVariables::svec_index(k, l), soff) += val;
            h(soff, off + SdpVariables::svec_index(k, l)) += val;
          }
      }
    }
  }

  for (std::size_t a = 0; a < scalar_terms_.size(); ++a)
    for (std::size_t b = a; b < scalar_terms_.size(); ++b) {
      const double val = (scalar_terms_[a].d * v * scalar_terms_[b].d * v).trace();
      const int ia = vars.scalar_offset(scalar_terms_[a].scalar);
      const int ib = vars.scalar_offset(scalar_terms_[b].scalar);
      h(ia, ib) += val;
      if (ia != ib) h(ib, ia) += val;
    }
}

SparseBlock::SparseBlock(int size, Eigen::MatrixXd c0)
    : ConstraintBlock(size), c0_(std::move(c0)) {
  if (c0_.rows() != size || c0_.cols() != size)
    throw std::invalid_argument("constant term has the wrong size");
}

void SparseBlock::add_coefficient(int flat_var, std::vector<Eigen::Triplet<double>> entries) {
  coeffs_.push_back({flat_var, std::move(entries)});
}

void SparseBlock::eval(const SdpVariables&, const Eigen::VectorXd& y,
                       Eigen::MatrixXd& x) const {
  x = c0_;
  for (const Coeff& c : coeffs_) {
    const double w = y[c.var];
    if (w == 0.0) continue;
    for (const auto& t : c.f) x(t.row(), t.col()) += w * t.value();
  }
}

void SparseBlock::apply(const SdpVariables&, const Eigen::VectorXd& dy,
                        Eigen::MatrixXd& dx) const {
  dx.setZero(size_, size_);
  for (const Coeff& c : coeffs_) {
    const double w = dy[c.var];
    if (w == 0.0) continue;
    for (const auto& t : c.f) dx(t.row(), t.col()) += w * t.value();
  }
}

void SparseBlock::accumulate_adjoint(const SdpVariables&, const Eigen::MatrixXd& m,
                                     Eigen::VectorXd& out) const {
  for (const Coeff& c : coeffs_) {
    double acc = 0.0;
    for (const auto& t : c.f) acc += t.value() * m(t.row(), t.col());
    out[c.var] += acc;
  }
}

void SparseBlock::accumulate_schur(const SdpVariables&, const Eigen::MatrixXd& v,
                                   Eigen::MatrixXd& h) const {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(size_, size_);
  for (std::size_t a = 0; a < coeffs_.size(); ++a) {
    f.setZero();
    for (const auto& t : coeffs_[a].f) f(t.row(), t.col()) += t.value();
    const Eigen::MatrixXd va = v * f * v;
    for (std::size_t b = a; b < coeffs_.size(); ++b) {
      double acc = 0.0;
      for (const auto& t : coeffs_[b].f) acc += t.value() * va(t.row(), t.col());
      h(coeffs_[a].var, coeffs_[b].var) += acc;
      if (coeffs_[a].var != coeffs_[b].var) h(coeffs_[b].var, coeffs_[a].var) += acc;
    }
  }
}

}  // namespace gtsec
